"""Hilbert axiom schemas of Ldm, Tstit and Xstit, and their instance corpora.

Each schema is a builder from (parameters, formulas) to an object-language
formula. Instances are NNF formulas wrapped as singleton sequents ``{w0: A}``
and serve as the prover's regression corpus. Inference rules (modus ponens,
necessitation, the irreflexivity rule) appear as metadata only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from typing import Callable

from . import formula as fm
from .formula import (
    AgStit, AgStitDual, Box, Diamond, F, G, H, Next, NextDual, P, PosAtom, Stit, StitDual, XStit, XStitDual,
    conj, disj, group_text, iff, implies, negate, render,
)
from .sequent import Sequent, singleton


@dataclass(frozen=True)
class AxiomSchema:
    name: str
    logic: str  # tier that introduces the schema
    text: str  # display form
    slots: Callable[[int], int]  # number of formula metavariables for n agents
    params: Callable[[int], list]  # parameter assignments for n agents
    build: Callable[[dict, tuple], fm.Formula]
    side_condition: str = ""

    def instances(self, agents: int, pool: list) -> list:
        """(params, formulas, formula) triples; side conditions are enforced by ``params``."""
        out = []
        for prm in self.params(agents):
            for fs in product(pool, repeat=self.slots(agents)):
                out.append((prm, fs, self.build(prm, fs)))
        return out


@dataclass(frozen=True)
class InferenceRule:
    name: str
    logic: str
    text: str


@dataclass(frozen=True)
class Instance:
    schema: str
    params: dict
    formulas: tuple
    sequent: Sequent

    def to_json(self) -> dict:
        return {
            "schema": self.schema,
            "parameters": {**{k: _param_text(v) for k, v in self.params.items()},
                           "formulas": [render(f) for f in self.formulas]},
            "sequent": self.sequent.text(),
        }


def _param_text(v):
    return group_text(v) if isinstance(v, frozenset) else v


def _const(n):
    return lambda agents: n


def _none(agents):
    return [{}]


def _each_agent(agents):
    return [{"i": i} for i in range(1, agents + 1)]


def _groups(agents):
    members = range(1, agents + 1)
    out = []
    for mask in range(1 << agents):
        out.append(frozenset(m for k, m in enumerate(members) if mask >> k & 1))
    return sorted(out, key=lambda g: (len(g), sorted(g)))


def _each_group(agents):
    return [{"A": a} for a in _groups(agents)]


def _subgroups(agents):
    return [{"A": a, "B": b} for a in _groups(agents) for b in _groups(agents) if a <= b]


def _disjoint(agents):
    return [{"A": a, "B": b} for a in _groups(agents) for b in _groups(agents) if not a & b]


def _xstit_alpha(agents):
    return [{"alpha": "[]"}] + [{"alpha": "[A]x", "A": a} for a in _groups(agents)] + [{"alpha": "[X]"}]


def _tstit_alpha(agents):
    return [{"alpha": a} for a in ("G", "H", "[Ag]")]


def _apply_alpha(prm, f):
    a = prm["alpha"]
    if a == "[]":
        return Box(f)
    if a == "[A]x":
        return XStit(prm["A"], f)
    if a == "[X]":
        return Next(f)
    return {"G": G, "H": H, "[Ag]": AgStit}[a](f)


def _k(box):
    return lambda prm, fs: implies(box(prm, implies(fs[0], fs[1])), implies(box(prm, fs[0]), box(prm, fs[1])))


_PROP = [
    ("A1", "phi -> (psi -> phi)", _const(2), lambda prm, fs: implies(fs[0], implies(fs[1], fs[0]))),
    ("A2", "(neg psi -> neg phi) -> (phi -> psi)", _const(2),
     lambda prm, fs: implies(implies(negate(fs[1]), negate(fs[0])), implies(fs[0], fs[1]))),
    ("A3", "(phi -> (psi -> chi)) -> ((phi -> psi) -> (phi -> chi))", _const(3),
     lambda prm, fs: implies(implies(fs[0], implies(fs[1], fs[2])),
                             implies(implies(fs[0], fs[1]), implies(fs[0], fs[2])))),
]


def _prop(logic):
    return [AxiomSchema(n, logic, t, s, _none, b) for n, t, s, b in _PROP]


def _ldm() -> list:
    out = _prop("ldm")
    out += [
        AxiomSchema("T-box", "ldm", "[]phi -> phi", _const(1), _none, lambda prm, fs: implies(Box(fs[0]), fs[0])),
        AxiomSchema("5-box", "ldm", "<>phi -> []<>phi", _const(1), _none,
                    lambda prm, fs: implies(Diamond(fs[0]), Box(Diamond(fs[0])))),
        AxiomSchema("K-box", "ldm", "[](phi -> psi) -> ([]phi -> []psi)", _const(2), _none,
                    _k(lambda prm, f: Box(f))),
        AxiomSchema("T-stit", "ldm", "[i]phi -> phi", _const(1), _each_agent,
                    lambda prm, fs: implies(Stit(prm["i"], fs[0]), fs[0])),
        AxiomSchema("5-stit", "ldm", "<i>phi -> [i]<i>phi", _const(1), _each_agent,
                    lambda prm, fs: implies(StitDual(prm["i"], fs[0]), Stit(prm["i"], StitDual(prm["i"], fs[0])))),
        AxiomSchema("dual-box", "ldm", "[]phi | <>neg phi", _const(1), _none,
                    lambda prm, fs: fm.Or(Box(fs[0]), Diamond(negate(fs[0])))),
        AxiomSchema("dual-stit", "ldm", "[i]phi | <i>neg phi", _const(1), _each_agent,
                    lambda prm, fs: fm.Or(Stit(prm["i"], fs[0]), StitDual(prm["i"], negate(fs[0])))),
        AxiomSchema("IOA", "ldm", "&_i <>[i]phi_i -> <>(&_i [i]phi_i)", lambda n: n, _none,
                    lambda prm, fs: implies(conj(*(Diamond(Stit(i, f)) for i, f in enumerate(fs, 1))),
                                            Diamond(conj(*(Stit(i, f) for i, f in enumerate(fs, 1)))))),
        AxiomSchema("K-stit", "ldm", "[i](phi -> psi) -> ([i]phi -> [i]psi)", _const(2), _each_agent,
                    _k(lambda prm, f: Stit(prm["i"], f))),
        AxiomSchema("box-stit", "ldm", "[]phi -> [i]phi", _const(1), _each_agent,
                    lambda prm, fs: implies(Box(fs[0]), Stit(prm["i"], fs[0]))),
    ]
    return out


def _tstit() -> list:
    t = "tstit"
    out = [
        AxiomSchema("T-Ag", t, "[Ag]phi -> phi", _const(1), _none, lambda prm, fs: implies(AgStit(fs[0]), fs[0])),
        AxiomSchema("5-Ag", t, "<Ag>phi -> [Ag]<Ag>phi", _const(1), _none,
                    lambda prm, fs: implies(AgStitDual(fs[0]), AgStit(AgStitDual(fs[0])))),
        AxiomSchema("Ag-meet", t, "&_i [i]phi_i -> [Ag](&_i phi_i)", lambda n: n, _none,
                    lambda prm, fs: implies(conj(*(Stit(i, f) for i, f in enumerate(fs, 1))), AgStit(conj(*fs)))),
        AxiomSchema("GP", t, "phi -> GPphi", _const(1), _none, lambda prm, fs: implies(fs[0], G(P(fs[0])))),
        AxiomSchema("HF", t, "phi -> HFphi", _const(1), _none, lambda prm, fs: implies(fs[0], H(F(fs[0])))),
        AxiomSchema("ser-G", t, "Gphi -> Fphi", _const(1), _none, lambda prm, fs: implies(G(fs[0]), F(fs[0]))),
        AxiomSchema("trans-F", t, "FFphi -> Fphi", _const(1), _none, lambda prm, fs: implies(F(F(fs[0])), F(fs[0]))),
        AxiomSchema("conn-FP", t, "FPphi -> Pphi | phi | Fphi", _const(1), _none,
                    lambda prm, fs: implies(F(P(fs[0])), disj(P(fs[0]), fs[0], F(fs[0])))),
        AxiomSchema("conn-PF", t, "PFphi -> Pphi | phi | Fphi", _const(1), _none,
                    lambda prm, fs: implies(P(F(fs[0])), disj(P(fs[0]), fs[0], F(fs[0])))),
        AxiomSchema("dual-G", t, "Gphi | Fneg phi", _const(1), _none,
                    lambda prm, fs: fm.Or(G(fs[0]), F(negate(fs[0])))),
        AxiomSchema("dual-H", t, "Hphi | Pneg phi", _const(1), _none,
                    lambda prm, fs: fm.Or(H(fs[0]), P(negate(fs[0])))),
        AxiomSchema("dual-Ag", t, "[Ag]phi | <Ag>neg phi", _const(1), _none,
                    lambda prm, fs: fm.Or(AgStit(fs[0]), AgStitDual(negate(fs[0])))),
        AxiomSchema("K-alpha", t, "alpha(phi -> psi) -> (alpha phi -> alpha psi), alpha in {G,H,[Ag]}", _const(2),
                    _tstit_alpha, _k(_apply_alpha)),
        AxiomSchema("NCUH", t, "F<>phi -> <Ag>Fphi", _const(1), _none,
                    lambda prm, fs: implies(F(Diamond(fs[0])), AgStitDual(F(fs[0])))),
    ]
    return out


def _xstit() -> list:
    x = "xstit"
    out = _prop(x)
    out += [
        AxiomSchema("K-alpha", x, "alpha(phi -> psi) -> (alpha phi -> alpha psi), alpha in {[],[A]x,[X]}", _const(2),
                    _xstit_alpha, _k(_apply_alpha)),
        AxiomSchema("T-box", x, "[]phi -> phi", _const(1), _none, lambda prm, fs: implies(Box(fs[0]), fs[0])),
        AxiomSchema("5-box", x, "<>phi -> []<>phi", _const(1), _none,
                    lambda prm, fs: implies(Diamond(fs[0]), Box(Diamond(fs[0])))),
        AxiomSchema("D-group", x, "[A]x phi -> <A>x phi", _const(1), _each_group,
                    lambda prm, fs: implies(XStit(prm["A"], fs[0]), XStitDual(prm["A"], fs[0]))),
        AxiomSchema("det-X", x, "<X>phi -> [X]phi", _const(1), _none,
                    lambda prm, fs: implies(NextDual(fs[0]), Next(fs[0]))),
        AxiomSchema("box-X-empty", x, "[][X]phi <-> [{}]x phi", _const(1), _none,
                    lambda prm, fs: iff(Box(Next(fs[0])), XStit(frozenset(), fs[0]))),
        AxiomSchema("Ag-X-box", x, "[Ag]x phi <-> [X][]phi", _const(1), _none,
                    lambda prm, fs: iff(XStit(prm["Ag"], fs[0]), Next(Box(fs[0]))), ),
        AxiomSchema("mon-group", x, "[A]x phi -> [B]x phi", _const(1), _subgroups,
                    lambda prm, fs: implies(XStit(prm["A"], fs[0]), XStit(prm["B"], fs[0])),
                    side_condition="A subset of B subset of Ag"),
        AxiomSchema("dual-box", x, "[]phi | <>neg phi", _const(1), _none,
                    lambda prm, fs: fm.Or(Box(fs[0]), Diamond(negate(fs[0])))),
        AxiomSchema("dual-group", x, "[A]x phi | <A>x neg phi", _const(1), _each_group,
                    lambda prm, fs: fm.Or(XStit(prm["A"], fs[0]), XStitDual(prm["A"], negate(fs[0])))),
        AxiomSchema("IOA-x", x, "<>[A]x phi & <>[B]x psi -> <>([A]x phi & [B]x psi)", _const(2), _disjoint,
                    lambda prm, fs: implies(fm.And(Diamond(XStit(prm["A"], fs[0])), Diamond(XStit(prm["B"], fs[1]))),
                                            Diamond(fm.And(XStit(prm["A"], fs[0]), XStit(prm["B"], fs[1])))),
                    side_condition="A and B disjoint"),
        AxiomSchema("dual-X", x, "[X]phi | <X>neg phi", _const(1), _none,
                    lambda prm, fs: fm.Or(Next(fs[0]), NextDual(negate(fs[0])))),
    ]
    # [Ag]x needs the grand coalition, fixed per agent count
    fixed = []
    for s in out:
        if s.name == "Ag-X-box":
            s = AxiomSchema(s.name, s.logic, s.text, s.slots,
                            lambda n: [{"Ag": frozenset(range(1, n + 1))}], s.build)
        fixed.append(s)
    return fixed


RULES = {
    "ldm": [InferenceRule("MP", "ldm", "phi, phi -> psi / psi"), InferenceRule("Nec-box", "ldm", "phi / []phi")],
    "tstit": [InferenceRule("Nec-G", "tstit", "phi / Gphi"), InferenceRule("Nec-H", "tstit", "phi / Hphi"),
              InferenceRule("IRR", "tstit", "([]~p & [](Gp & Hp)) -> phi / phi, p not in phi")],
    "xstit": [InferenceRule("MP", "xstit", "phi, phi -> psi / psi"),
              InferenceRule("Nec-alpha", "xstit", "phi / alpha phi, alpha in {[],[A]x,[X]}")],
}


def schemas(logic: str) -> list:
    """All axiom schemas of ``logic``; Tstit is Ldm plus its own sixteen."""
    if logic == "ldm":
        return _ldm()
    if logic == "tstit":
        return _ldm() + _tstit()
    if logic == "xstit":
        return _xstit()
    raise ValueError(f"unknown logic {logic!r}")


def inference_rules(logic: str) -> list:
    if logic == "tstit":
        return RULES["ldm"] + RULES["tstit"]
    if logic in RULES:
        return list(RULES[logic])
    raise ValueError(f"unknown logic {logic!r}")


def formula_pool(atoms=("p", "q"), depth: int = 0) -> list:
    """Substitution formulas: atoms; depth 1 adds negated atoms; depth 2 adds binary combinations."""
    if not 0 <= depth <= 2:
        raise ValueError("depth must be between 0 and 2")
    pool = [PosAtom(a) for a in atoms]
    if depth >= 1:
        pool += [negate(PosAtom(a)) for a in atoms]
    if depth >= 2:
        base = list(pool)
        pool += [fm.And(a, b) for a in base for b in base if a != b]
        pool += [fm.Or(a, b) for a in base for b in base if a != b]
    return pool


def instantiate(schema: AxiomSchema, agents: int = 2, atoms=("p", "q"), depth: int = 0,
                logic: str | None = None) -> list:
    """Instances of ``schema`` as singleton sequents, one per parameter and formula assignment."""
    logic = logic or schema.logic
    out = []
    for prm, fs, f in schema.instances(agents, formula_pool(atoms, depth)):
        out.append(Instance(schema.name, dict(prm), tuple(fs), singleton(f, logic, agents)))
    return out


def corpus(logic: str, agents: int = 2, atoms=("p", "q"), depth: int = 0) -> list:
    """Every instance of every schema of ``logic``, as sequents of that logic."""
    out = []
    for s in schemas(logic):
        out += instantiate(s, agents, atoms, depth, logic)
    return out


def to_jsonl(instances) -> str:
    return "".join(json.dumps(i.to_json(), sort_keys=True) + "\n" for i in instances)
