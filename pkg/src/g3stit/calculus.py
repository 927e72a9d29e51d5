"""Rule schemas of G3Ldm, G3Tstit and G3Xstit, and backward matching against sequents.

A schema lists the active items of its conclusion and, for each premise, the
active items of that premise; the context is carried over unchanged. Rules
that keep their principal formula (diamond-like rules) simply repeat it in the
premise. Parameters (agent ``i``, groups ``A``/``B``) are fixed when the
table is built, so each schema entry is a concrete rule of the calculus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

from . import formula as fm
from .formula import group_text
from .semantics import all_groups
from .sequent import (
    AG, BOX, RG, RG_COMP, RH, RX, Equality, Labelled, RelAtom, Sequent, agent_tag, group_tag, label_text,
    rename_item,
)
from .unionfind import UnionFind

# --------------------------------------------------------------- patterns


@dataclass(frozen=True)
class Meta:
    """Any formula, bound by name."""

    name: str


@dataclass(frozen=True)
class AtomMeta:
    """A literal whose atom name is bound by ``name``."""

    name: str
    positive: bool


@dataclass(frozen=True)
class Op:
    """A formula constructor with fixed index (agent/group or None) and sub-patterns."""

    kind: type
    param: object
    args: tuple


@dataclass(frozen=True)
class PRel:
    tag: str
    src: str
    dst: str


@dataclass(frozen=True)
class PEq:
    left: str
    right: str


@dataclass(frozen=True)
class PLab:
    label: str
    formula: object


def _op(kind, *args, param=None):
    return Op(kind, param, tuple(args))


PHI, PSI = Meta("phi"), Meta("psi")


def match_formula(pat, f, fbind: dict) -> dict | None:
    if isinstance(pat, Meta):
        if pat.name in fbind:
            return fbind if fbind[pat.name] == f else None
        out = dict(fbind)
        out[pat.name] = f
        return out
    if isinstance(pat, AtomMeta):
        if type(f) is not (fm.PosAtom if pat.positive else fm.NegAtom):
            return None
        key = "atom:" + pat.name
        if key in fbind:
            return fbind if fbind[key] == f.name else None
        out = dict(fbind)
        out[key] = f.name
        return out
    if type(f) is not pat.kind:
        return None
    if pat.param is not None:
        actual = f.agent if hasattr(f, "agent") else f.group
        if actual != pat.param:
            return None
    subs = fm.children(f)
    for sp, sf in zip(pat.args, subs):
        fbind = match_formula(sp, sf, fbind)
        if fbind is None:
            return None
    return fbind


def build_formula(pat, fbind: dict):
    if isinstance(pat, Meta):
        return fbind[pat.name]
    if isinstance(pat, AtomMeta):
        name = fbind["atom:" + pat.name]
        return fm.PosAtom(name) if pat.positive else fm.NegAtom(name)
    args = [build_formula(a, fbind) for a in pat.args]
    if pat.param is not None:
        return pat.kind(pat.param, *args)
    return pat.kind(*args)


def build_item(pat, lbind: dict, fbind: dict):
    if isinstance(pat, PRel):
        return RelAtom(pat.tag, lbind[pat.src], lbind[pat.dst])
    if isinstance(pat, PEq):
        return Equality(lbind[pat.left], lbind[pat.right])
    return Labelled(lbind[pat.label], build_formula(pat.formula, fbind))


def pattern_vars(pat) -> list:
    if isinstance(pat, PRel):
        return [pat.src, pat.dst]
    if isinstance(pat, PEq):
        return [pat.left, pat.right]
    return [pat.label]


def _fpattern_text(pat) -> str:
    if isinstance(pat, Meta):
        return pat.name
    if isinstance(pat, AtomMeta):
        return pat.name if pat.positive else "~" + pat.name
    args = [_fpattern_text(a) for a in pat.args]
    if pat.kind in (fm.And, fm.Or):
        sym = " & " if pat.kind is fm.And else " | "
        return f"({sym.join(args)})"
    dummy = build_formula(pat, _DummyBinding())
    prefix = fm.render(dummy).split("@")[0]
    return prefix + args[0]


class _DummyBinding(dict):
    def __missing__(self, key):
        return fm.PosAtom("@")


def pattern_text(pat) -> str:
    if isinstance(pat, PRel):
        return f"{pat.tag}:{pat.src},{pat.dst}"
    if isinstance(pat, PEq):
        return f"{pat.left} = {pat.right}"
    return f"{pat.label}: {_fpattern_text(pat.formula)}"


# ----------------------------------------------------------------- schemas


@dataclass(frozen=True)
class RuleSchema:
    name: str
    kind: str  # initial | logical | geometric | system-member
    conclusion: tuple
    premises: tuple  # tuple of tuples of pattern items
    eigenvariables: frozenset = frozenset()
    params: tuple = ()  # sorted (key, value) pairs
    side_condition: str = ""
    free_vars: tuple = ()  # label vars not fixed by the conclusion (range over the sequent's labels)
    context_vars: tuple = ()  # vars bound from an open (IOA-E) obligation
    closure_of: str = ""
    system: str = ""  # "E", "U1" or "U2" for members of the (IOA_X) system

    @property
    def key(self) -> tuple:
        return (self.name, self.params)

    @property
    def param_dict(self) -> dict:
        return dict(self.params)

    @property
    def retains_principal(self) -> bool:
        labs = [p for p in self.conclusion if isinstance(p, PLab)]
        return bool(labs) and self.kind == "logical" and all(labs[0] in prem for prem in self.premises)

    @property
    def creates_labels(self) -> bool:
        return bool(self.eigenvariables)

    @property
    def is_substitution(self) -> bool:
        return self.name == "sub_eq"

    def display(self) -> str:
        extra = ",".join(f"{k}={_param_text(v)}" for k, v in self.params)
        return f"({self.name}{'[' + extra + ']' if extra else ''})"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "params": {k: _param_text(v) for k, v in self.params},
            "conclusion": [pattern_text(p) for p in self.conclusion],
            "premises": [[pattern_text(p) for p in prem] for prem in self.premises],
            "eigenvariables": sorted(self.eigenvariables),
            "side_condition": self.side_condition,
            "principal_retained": self.retains_principal,
            "closure_of": self.closure_of,
        }


def _param_text(v) -> str:
    if isinstance(v, frozenset):
        return group_text(v)
    return str(v)


def _params(**kw) -> tuple:
    return tuple(sorted(kw.items()))


def _schema(name, kind, conclusion, premises, eigen=(), params=(), side="", free=(), context=(), system=""):
    return RuleSchema(
        name=name, kind=kind, conclusion=tuple(conclusion), premises=tuple(tuple(p) for p in premises),
        eigenvariables=frozenset(eigen), params=params, side_condition=side, free_vars=tuple(free),
        context_vars=tuple(context), system=system,
    )


def _universal(name, kind_cls, tag, param=None, params=()):
    """Rule for a box-like operator: the premise opens a fresh successor."""
    op = _op(kind_cls, PHI, param=param)
    return _schema(name, "logical", [PLab("w", op)], [[PRel(tag, "w", "v"), PLab("v", PHI)]], eigen=["v"], params=params)


def _existential(name, kind_cls, tag, param=None, params=()):
    op = _op(kind_cls, PHI, param=param)
    concl = [PRel(tag, "w", "u"), PLab("w", op)]
    return _schema(name, "logical", concl, [concl + [PLab("u", PHI)]], params=params)


def _refl(name, tag, params=()):
    return _schema(name, "geometric", [], [[PRel(tag, "w", "w")]], params=params, free=["w"])


def _eucl(name, tag, params=()):
    concl = [PRel(tag, "w", "u"), PRel(tag, "w", "v")]
    return _schema(name, "geometric", concl, [concl + [PRel(tag, "u", "v")]], params=params)


def _core_rules() -> list:
    return [
        _schema("id", "initial", [PLab("w", AtomMeta("p", True)), PLab("w", AtomMeta("p", False))], []),
        _schema("and", "logical", [PLab("w", _op(fm.And, PHI, PSI))], [[PLab("w", PHI)], [PLab("w", PSI)]]),
        _schema("or", "logical", [PLab("w", _op(fm.Or, PHI, PSI))], [[PLab("w", PHI), PLab("w", PSI)]]),
        _universal("box", fm.Box, BOX),
        _existential("dia", fm.Diamond, BOX),
        _refl("refl_box", BOX),
        _eucl("eucl_box", BOX),
    ]


def _equality_rules() -> list:
    return [
        _schema("refl_eq", "geometric", [], [[PEq("w", "w")]], free=["w"]),
        _schema("eucl_eq", "geometric", [PEq("w", "u"), PEq("w", "v")], [[PEq("w", "u"), PEq("w", "v"), PEq("u", "v")]]),
        # Delta is matched specially: any items mentioning w are copied with w replaced by u
        _schema("sub_eq", "geometric", [PEq("w", "u")], [[PEq("w", "u")]]),
    ]


def _ldm_rules(agents: int) -> list:
    rules = _core_rules()
    for i in range(1, agents + 1):
        p = _params(i=i)
        t = agent_tag(i)
        rules += [
            _universal("stit", fm.Stit, t, param=i, params=p),
            _existential("stit_dual", fm.StitDual, t, param=i, params=p),
            _refl("refl_stit", t, params=p),
            _eucl("eucl_stit", t, params=p),
            _schema("br_stit", "geometric", [PRel(t, "w", "u")], [[PRel(t, "w", "u"), PRel(BOX, "w", "u")]], params=p),
        ]
    us = [f"u{i}" for i in range(1, agents + 1)]
    concl = [PRel(BOX, "w", u) for u in us]
    added = [PRel(agent_tag(i), u, "v") for i, u in enumerate(us, start=1)]
    rules.append(_schema("IOA", "geometric", concl, [concl + added], eigen=["v"]))
    return rules


def _tstit_rules(agents: int) -> list:
    rules = _ldm_rules(agents)
    rules += [
        _universal("G", fm.G, RG),
        _existential("F", fm.F, RG),
        _universal("H", fm.H, RH),
        _existential("P", fm.P, RH),
        _universal("ag", fm.AgStit, AG),
        _existential("ag_dual", fm.AgStitDual, AG),
        _refl("refl_ag", AG),
        _eucl("eucl_ag", AG),
    ]
    for i in range(1, agents + 1):
        rules.append(_schema("agd", "geometric", [PRel(AG, "w", "u")],
                             [[PRel(AG, "w", "u"), PRel(agent_tag(i), "w", "u")]], params=_params(i=i)))
    for name, tag, other in (("conv_G", RG, RH), ("conv_H", RH, RG)):
        rules.append(_schema(name, "geometric", [PRel(tag, "w", "u")], [[PRel(tag, "w", "u"), PRel(other, "u", "w")]]))
    for name, tag in (("conn_G", RG), ("conn_H", RH)):
        concl = [PRel(tag, "w", "u"), PRel(tag, "w", "v")]
        rules.append(_schema(name, "geometric", concl, [
            concl + [PRel(tag, "u", "v")],
            concl + [PEq("u", "v")],
            concl + [PRel(tag, "v", "u")],
        ]))
    rules += [
        _schema("trans_G", "geometric", [PRel(RG, "w", "u"), PRel(RG, "u", "v")],
                [[PRel(RG, "w", "u"), PRel(RG, "u", "v"), PRel(RG, "w", "v")]]),
        _schema("ser_G", "geometric", [], [[PRel(RG, "w", "v")]], eigen=["v"], free=["w"]),
        _schema("ncuh", "geometric", [PRel(RG, "w", "u"), PRel(BOX, "u", "z")],
                [[PRel(RG, "w", "u"), PRel(BOX, "u", "z"), PRel(AG, "w", "v"), PRel(RG, "v", "z")]], eigen=["v"]),
        _schema("irr_G", "geometric", [PRel(BOX, "w", "u")], [[PRel(BOX, "w", "u"), PRel(RG_COMP, "w", "u")]]),
        _schema("comp_G1", "initial", [PRel(RG, "w", "u"), PRel(RG_COMP, "w", "u")], []),
        _schema("comp_G2", "geometric", [], [[PRel(RG, "w", "u")], [PRel(RG_COMP, "w", "u")]], free=["w", "u"]),
    ]
    rules += _equality_rules()
    return rules


def _xstit_rules(agents: int) -> list:
    rules = _core_rules() + _equality_rules()
    groups = all_groups(agents)
    empty, grand = frozenset(), frozenset(range(1, agents + 1))
    for a in groups:
        p = _params(A=a)
        rules += [
            _universal("xstit", fm.XStit, group_tag(a), param=a, params=p),
            _existential("xstit_dual", fm.XStitDual, group_tag(a), param=a, params=p),
        ]
    rules += [
        _universal("next", fm.Next, RX),
        _existential("next_dual", fm.NextDual, RX),
        _schema("ser_X", "geometric", [], [[PRel(RX, "w", "v")]], eigen=["v"], free=["w"]),
        _schema("det_X", "geometric", [PRel(RX, "w", "v"), PRel(RX, "w", "u")],
                [[PEq("v", "u"), PRel(RX, "w", "v"), PRel(RX, "w", "u")]]),
    ]
    for a in groups:
        for b in groups:
            if b < a:
                rules.append(_schema("C-Mon", "geometric", [PRel(group_tag(a), "w", "v")],
                                     [[PRel(group_tag(a), "w", "v"), PRel(group_tag(b), "w", "v")]],
                                     params=_params(A=a, B=b), side="B subset of A"))
    r0, rag = group_tag(empty), group_tag(grand)
    rules += [
        _schema("Eff0", "geometric", [PRel(BOX, "w", "v"), PRel(RX, "v", "u")],
                [[PRel(BOX, "w", "v"), PRel(RX, "v", "u"), PRel(r0, "w", "u")]]),
        _schema("0Eff", "geometric", [PRel(r0, "w", "u")],
                [[PRel(BOX, "w", "v"), PRel(RX, "v", "u"), PRel(r0, "w", "u")]], eigen=["v"]),
        _schema("EffAg", "geometric", [PRel(RX, "w", "v"), PRel(BOX, "v", "u")],
                [[PRel(rag, "w", "u"), PRel(RX, "w", "v"), PRel(BOX, "v", "u")]]),
        _schema("AgEff", "geometric", [PRel(rag, "w", "u")],
                [[PRel(rag, "w", "u"), PRel(RX, "w", "v"), PRel(BOX, "v", "u")]], eigen=["v"]),
    ]
    for a in groups:
        for b in groups:
            if a & b:
                continue
            p = _params(A=a, B=b)
            ta, tb = group_tag(a), group_tag(b)
            concl = [PRel(BOX, "w1", "w2"), PRel(BOX, "w1", "w3")]
            rules += [
                _schema("IOA-E", "system-member", concl, [concl + [PRel(BOX, "w1", "w4")]], eigen=["w4"],
                        params=p, side="A and B disjoint", system="E"),
                _schema("IOA-U1", "system-member", [PRel(ta, "w4", "w5")],
                        [[PRel(ta, "w4", "w5"), PRel(ta, "w2", "w5")]], params=p,
                        context=["w1", "w2", "w3", "w4"], system="U1"),
                _schema("IOA-U2", "system-member", [PRel(tb, "w4", "w6")],
                        [[PRel(tb, "w4", "w6"), PRel(tb, "w3", "w6")]], params=p,
                        context=["w1", "w2", "w3", "w4"], system="U2"),
            ]
    return rules


# ----------------------------------------------------------- closure rules


def _rename_pattern(pat, mapping):
    if isinstance(pat, PRel):
        return PRel(pat.tag, mapping.get(pat.src, pat.src), mapping.get(pat.dst, pat.dst))
    if isinstance(pat, PEq):
        return PEq(mapping.get(pat.left, pat.left), mapping.get(pat.right, pat.right))
    return PLab(mapping.get(pat.label, pat.label), pat.formula)


def _dedupe(pats) -> tuple:
    out = []
    for p in pats:
        if p not in out:
            out.append(p)
    return tuple(out)


def _canonical_shape(schema: RuleSchema) -> tuple:
    order: dict = {}
    for pat in list(schema.conclusion) + [p for prem in schema.premises for p in prem]:
        for v in pattern_vars(pat):
            order.setdefault(v, f"x{len(order)}")
    ren = lambda pats: tuple(sorted(repr(_rename_pattern(p, order)) for p in pats))  # noqa: E731
    return (schema.name, schema.params, ren(schema.conclusion), tuple(sorted(ren(p) for p in schema.premises)))


def _unifier(pairs) -> list:
    """Blocks of label variables forced equal by unifying each pair of atoms."""
    uf = UnionFind()
    for a, b in pairs:
        for x, y in zip(pattern_vars(a), pattern_vars(b)):
            uf.union(x, y)
    blocks: dict = {}
    for a, b in pairs:
        for v in pattern_vars(a) + pattern_vars(b):
            blocks.setdefault(uf.find(v), [])
            if v not in blocks[uf.find(v)]:
                blocks[uf.find(v)].append(v)
    return [sorted(b) for b in blocks.values() if len(b) > 1]


def closure_instances(table: list) -> list:
    """Contracted instances for each unification that makes two active atoms coincide.

    Only most general unifiers of sets of same-kind atom pairs are used; coarser
    identifications are substitution instances of these and add nothing.
    """
    out: list = []
    seen = {_canonical_shape(s) for s in table}
    for schema in table:
        if schema.is_substitution or schema.context_vars:
            continue
        active = [p for p in schema.conclusion if isinstance(p, (PRel, PEq))]
        pairs = [(a, b) for a, b in combinations(active, 2) if type(a) is type(b) and getattr(a, "tag", None) == getattr(b, "tag", None)]
        for k in range(1, len(pairs) + 1):
            for chosen in combinations(pairs, k):
                blocks = _unifier(chosen)
                mapping = {v: b[0] for b in blocks for v in b}
                concl = _dedupe(_rename_pattern(p, mapping) for p in schema.conclusion)
                prems = tuple(_dedupe(_rename_pattern(p, mapping) for p in prem) for prem in schema.premises)
                if any(set(prem) == set(concl) for prem in prems):
                    continue
                merged = ",".join("=".join(b) for b in blocks)
                inst = RuleSchema(
                    name=schema.name, kind=schema.kind, conclusion=concl, premises=prems,
                    eigenvariables=schema.eigenvariables, params=schema.params + (("merge", merged),),
                    side_condition=schema.side_condition, free_vars=(), context_vars=(),
                    closure_of=schema.name, system=schema.system,
                )
                shape = _canonical_shape(inst)
                if shape in seen:
                    continue
                seen.add(shape)
                out.append(inst)
    return out


def rule_table(logic: str, agents: int) -> list:
    """All rules of the calculus for ``logic`` at ``agents`` agents, closure instances included."""
    if agents < 1:
        raise ValueError("agent count must be at least 1")
    if logic == "ldm":
        base = _ldm_rules(agents)
    elif logic == "tstit":
        base = _tstit_rules(agents)
    elif logic == "xstit":
        base = _xstit_rules(agents)
    else:
        raise ValueError(f"unknown logic {logic!r}")
    return base + closure_instances(base)


def table_index(table: list) -> dict:
    return {s.key: s for s in table}


def dump_table(table: list) -> str:
    return json.dumps([s.to_json() for s in table], indent=2)


# ------------------------------------------------------------- obligations


@dataclass
class SystemObligation:
    """An open (IOA-E) application: U-rules above it may use its anchor labels."""

    A: frozenset
    B: frozenset
    anchor: tuple  # (w1, w2, w3, w4)
    discharged: dict = field(default_factory=dict)  # "U1"/"U2" -> branch paths that used it

    @property
    def params(self) -> tuple:
        return _params(A=self.A, B=self.B)

    def anchor_binding(self) -> dict:
        return dict(zip(("w1", "w2", "w3", "w4"), self.anchor))

    def record(self, which: str, path: tuple):
        self.discharged.setdefault(which, []).append(path)

    @property
    def complete(self) -> bool:
        """Both U-rules used, in branches neither of which lies above the other."""
        if not self.discharged:
            return True
        for p in self.discharged.get("U1", []):
            for q in self.discharged.get("U2", []):
                if p[: len(q)] != q and q[: len(p)] != p:
                    return True
        return False


# ---------------------------------------------------------------- matching


@dataclass
class RuleInstance:
    schema: RuleSchema
    labels: dict  # pattern var -> label, fresh ones included
    formulas: dict
    principal: tuple  # conclusion items consumed by the match
    premises: tuple  # tuple of Sequent
    fresh: tuple = ()
    delta: tuple = ()  # items copied by (sub_eq)
    obligation: object = None  # the (IOA-E) obligation a U-rule discharges
    saturating: bool = True

    def describe(self) -> str:
        binds = ", ".join(f"{k}={label_text(v)}" for k, v in sorted(self.labels.items()))
        return f"{self.schema.display()} {binds}"


class _Index:
    def __init__(self, s: Sequent):
        self.rel: dict = {}
        self.eq: list = []
        self.lab: dict = {}
        for item in s.items:
            if isinstance(item, RelAtom):
                self.rel.setdefault(item.tag, []).append(item)
            elif isinstance(item, Equality):
                self.eq.append(item)
            else:
                self.lab.setdefault(type(item.formula), []).append(item)

    def candidates(self, pat) -> list:
        if isinstance(pat, PRel):
            return self.rel.get(pat.tag, [])
        if isinstance(pat, PEq):
            return self.eq
        f = pat.formula
        if isinstance(f, Op):
            return self.lab.get(f.kind, [])
        if isinstance(f, AtomMeta):
            return self.lab.get(fm.PosAtom if f.positive else fm.NegAtom, [])
        return [it for items in self.lab.values() for it in items]


def _bind_label(var, label, lbind):
    have = lbind.get(var)
    if have is None:
        out = dict(lbind)
        out[var] = label
        return out
    return lbind if have == label else None


def match_item(pat, item, lbind: dict, fbind: dict):
    if isinstance(pat, PRel):
        if not isinstance(item, RelAtom) or item.tag != pat.tag:
            return None
        lb = _bind_label(pat.src, item.src, lbind)
        if lb is None:
            return None
        lb = _bind_label(pat.dst, item.dst, lb)
        return None if lb is None else (lb, fbind)
    if isinstance(pat, PEq):
        if not isinstance(item, Equality):
            return None
        lb = _bind_label(pat.left, item.left, lbind)
        if lb is None:
            return None
        lb = _bind_label(pat.right, item.right, lb)
        return None if lb is None else (lb, fbind)
    if not isinstance(item, Labelled):
        return None
    lb = _bind_label(pat.label, item.label, lbind)
    if lb is None:
        return None
    fb = match_formula(pat.formula, item.formula, fbind)
    return None if fb is None else (lb, fb)


def match_conclusion(schema: RuleSchema, s: Sequent, lbind: dict | None = None, index: _Index | None = None):
    """Yield (label binding, formula binding, matched items) for every multiset match."""
    index = index or _Index(s)
    pats = list(schema.conclusion)
    counts = s.counts

    def rec(k, lb, fb, used):
        if k == len(pats):
            yield lb, fb, tuple(used)
            return
        seen = set()
        for item in index.candidates(pats[k]):
            if item in seen:
                continue
            seen.add(item)
            if used.count(item) >= counts[item]:
                continue
            res = match_item(pats[k], item, lb, fb)
            if res is None:
                continue
            used.append(item)
            yield from rec(k + 1, res[0], res[1], used)
            used.pop()

    yield from rec(0, dict(lbind or {}), {}, [])


def fresh_labels(s: Sequent, count: int, floor: int = 0) -> list:
    start = max([floor - 1] + list(s.labels)) + 1
    return list(range(start, start + count))


def instantiate(schema: RuleSchema, s: Sequent, lbind: dict, fbind: dict, principal: tuple,
                delta: tuple = (), obligation=None) -> RuleInstance:
    """Compute the premises of a matched schema."""
    context = s.remove(*principal)
    premises = []
    if schema.is_substitution:
        w, u = lbind["w"], lbind["u"]
        copies = tuple(rename_item(d, {w: u}) for d in delta)
        premises.append(s.add(*copies))
    else:
        for prem in schema.premises:
            premises.append(context.add(*(build_item(p, lbind, fbind) for p in prem)))
    fresh = tuple(lbind[v] for v in sorted(schema.eigenvariables))
    inst = RuleInstance(schema, dict(lbind), dict(fbind), tuple(principal), tuple(premises), fresh,
                        tuple(delta), obligation)
    # an instance only re-adding present items leaves some premise with nothing new
    inst.saturating = not any(set(p.counts) <= set(s.counts) for p in premises)
    return inst


def applicable(s: Sequent, table: list, obligations=(), fresh_floor: int = 0) -> list:
    """Every backward instance of ``table`` on ``s``.

    Free pattern variables range over the labels of ``s``; eigenvariables get
    labels not occurring in ``s``. ``obligations`` are the open (IOA-E)
    obligations under which U-rules may fire. Instances whose premise equals
    the conclusion are flagged ``saturating = False``.
    """
    index = _Index(s)
    labels = sorted(s.labels)
    out = []
    for schema in table:
        seeds: list = [({}, None)]
        if schema.context_vars:
            seeds = [(ob.anchor_binding(), ob) for ob in obligations if ob.params == _strip_merge(schema.params)]
        for seed, ob in seeds:
            for lb, fb, used in match_conclusion(schema, s, seed, index):
                free = [v for v in schema.free_vars if v not in lb]
                for choice in _product(labels, len(free)):
                    lb2 = dict(lb)
                    lb2.update(zip(free, choice))
                    fresh = fresh_labels(s, len(schema.eigenvariables), fresh_floor)
                    lb2.update(zip(sorted(schema.eigenvariables), fresh))
                    if schema.is_substitution:
                        w, u = lb2["w"], lb2["u"]
                        for item in dict.fromkeys(s.items):
                            if w in item.labels() and w != u:
                                out.append(instantiate(schema, s, lb2, fb, used, (item,), ob))
                        continue
                    out.append(instantiate(schema, s, lb2, fb, used, (), ob))
    return out


def _strip_merge(params: tuple) -> tuple:
    return tuple(p for p in params if p[0] != "merge")


def _product(labels, k):
    if k == 0:
        yield ()
        return
    from itertools import product

    yield from product(labels, repeat=k)
