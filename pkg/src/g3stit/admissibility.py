"""Empirical structural-property checks: id-generalization, weakening, invertibility, contraction.

Weakening and invertibility are checked by transforming a found proof, so the
height bound is a property of the transformed tree and not of a fresh search.
Every transformed tree is re-checked against the rule table.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import formula as fm
from .calculus import rule_table, table_index
from .generate import random_formula
from .proof import ProofTree, check_proof
from .semantics import _tag_of
from .sequent import Labelled, RelAtom, Sequent, rename_item, tags_for

_UNIVERSAL_RULES = {fm.Box: "box", fm.Stit: "stit", fm.AgStit: "ag", fm.G: "G", fm.H: "H", fm.XStit: "xstit",
                    fm.Next: "next"}


class Inconclusive(Exception):
    """The traced formula meets a rule the transformation does not handle."""


@dataclass
class PropertyResult:
    name: str
    checked: int = 0
    passed: int = 0
    inconclusive: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def line(self) -> str:
        return (f"{self.name}: {self.passed}/{self.checked} passed, {len(self.failures)} counterexample(s)"
                + (f", {self.inconclusive} inconclusive" if self.inconclusive else ""))


@dataclass
class AdmissibilityReport:
    results: dict

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results.values())

    def text(self) -> str:
        return "\n".join(r.line() for r in self.results.values())


# ------------------------------------------------------------ tree plumbing


def _tree_labels(tree: ProofTree) -> set:
    out = set()
    for n in tree.walk():
        out |= n.sequent.labels
        out |= set(n.labels.values())
    return out


def rename_tree(node: ProofTree, mapping: dict) -> ProofTree:
    """Rename labels everywhere in ``node`` and above it."""
    return ProofTree(
        sequent=node.sequent.with_items(tuple(rename_item(it, mapping) for it in node.sequent.items)),
        rule=node.rule, params=node.params,
        labels={k: mapping.get(v, v) for k, v in node.labels.items()},
        formulas=dict(node.formulas),
        principal=tuple(rename_item(it, mapping) for it in node.principal),
        delta=tuple(rename_item(it, mapping) for it in node.delta),
        children=[rename_tree(c, mapping) for c in node.children],
    )


class _Fresh:
    def __init__(self, used):
        self.next = max(used, default=-1) + 1

    def __call__(self) -> int:
        self.next += 1
        return self.next - 1


# --------------------------------------------------------------- weakening


def weaken(tree: ProofTree, extra: tuple, table: list) -> ProofTree:
    """Add ``extra`` to every sequent; eigenvariables that clash with it are renamed apart."""
    index = table_index(table)
    extra_labels = {x for it in extra for x in it.labels()}
    fresh = _Fresh(_tree_labels(tree) | extra_labels)

    def go(node):
        schema = index[node.key]
        clash = {node.labels[v] for v in schema.eigenvariables} & extra_labels
        children, labels = node.children, dict(node.labels)
        if clash:
            mapping = {e: fresh() for e in sorted(clash)}
            children = [rename_tree(c, mapping) for c in children]
            labels = {k: mapping.get(v, v) if k in schema.eigenvariables else v for k, v in labels.items()}
        return ProofTree(node.sequent.add(*extra), node.rule, node.params, labels, dict(node.formulas),
                         node.principal, node.delta, [go(c) for c in children])

    return go(tree)


# ----------------------------------------------------------- invertibility


def _rule_for(f) -> str | None:
    if isinstance(f, fm.Or):
        return "or"
    if isinstance(f, fm.And):
        return "and"
    return _UNIVERSAL_RULES.get(type(f))


def _pieces(item: Labelled, y, which: int) -> tuple:
    f, w = item.formula, item.label
    if isinstance(f, fm.Or):
        return (Labelled(w, f.left), Labelled(w, f.right))
    if isinstance(f, fm.And):
        return (Labelled(w, (f.left, f.right)[which]),)
    return (RelAtom(_tag_of(f), w, y), Labelled(y, f.body))


def invert(tree: ProofTree, target: Labelled, table: list, which: int = 0) -> ProofTree:
    """A derivation of the premise of the rule for ``target`` (premise ``which`` for (and)).

    The occurrence is traced upwards; where it is principal the rule node is
    dropped, so the height cannot grow. Copies made by (sub_eq) are traced too,
    sharing the fresh successor label of a box-like target.
    """
    rule = _rule_for(target.formula)
    if rule is None:
        raise ValueError("no invertible rule for this formula")
    index = table_index(table)
    fresh = _Fresh(_tree_labels(tree) | set(target.labels()))
    y = fresh() if rule not in ("or", "and") else None

    def replace(seq: Sequent, traced: list) -> Sequent:
        seq = seq.remove(*(t for t, _ in traced))
        return seq.add(*(p for t, yy in traced for p in _pieces(t, yy, which)))

    def go(node, traced):
        if not traced:
            return node
        schema = index[node.key]
        principal = list(node.principal)
        hit = next((k for k, (t, _) in enumerate(traced) if t in principal), None)
        if hit is not None:
            t, yy = traced[hit]
            if node.rule != _rule_for(t.formula) or len(principal) != 1:
                raise Inconclusive(f"traced item is principal in ({node.rule})")
            rest = traced[:hit] + traced[hit + 1:]
            child = node.children[which if node.rule == "and" else 0]
            if yy is not None:
                child = rename_tree(child, {node.labels["v"]: yy})
            return go(child, rest)
        labels, delta, child_traced = dict(node.labels), node.delta, list(traced)
        if schema.is_substitution:
            w, u = node.labels["w"], node.labels["u"]
            new_delta = []
            left = list(traced)
            for d in delta:
                match = next((k for k, (t, _) in enumerate(left) if t == d), None)
                if match is None:
                    new_delta.append(d)
                    continue
                t, yy = left.pop(match)
                new_delta.extend(_pieces(t, yy, which))
                child_traced.append((rename_item(t, {w: u}), yy))
            delta = tuple(new_delta)
        children = [go(c, child_traced if schema.is_substitution else traced) for c in node.children]
        return ProofTree(replace(node.sequent, traced), node.rule, node.params, labels, dict(node.formulas),
                         node.principal, delta, children)

    return go(tree, [(target, y)])


def premise_of(s: Sequent, target: Labelled, y: int | None, which: int = 0) -> Sequent:
    return s.remove(target).add(*_pieces(target, y, which))


# ------------------------------------------------------------------- suite


def _random_extra(rng: random.Random, s: Sequent) -> tuple:
    labels = sorted(s.labels) or [0]
    new = max(labels) + 1
    pool = labels + [new]
    f = random_formula(rng, s.logic, s.agents, 1)
    items = [Labelled(rng.choice(pool), f)]
    if rng.random() < 0.5:
        tag = rng.choice([t for t in tags_for(s.logic, s.agents) if t != "RGc"])
        items.append(RelAtom(tag, rng.choice(pool), rng.choice(pool)))
    return tuple(items)


def _check_tree(res: PropertyResult, tree: ProofTree, expected: Sequent, height: int, table: list, what: str):
    res.checked += 1
    verdict = check_proof(tree, table)
    if tree.sequent != expected:
        res.failures.append(f"{what}: transformed root is {tree.sequent.text()}")
    elif not verdict:
        res.failures.append(f"{what}: {verdict.diagnostic}")
    elif tree.height() > height:
        res.failures.append(f"{what}: height {tree.height()} > {height}")
    else:
        res.passed += 1


def admissibility_suite(corpus, cfg=None, seed: int = 0, id_formulas: int = 0) -> AdmissibilityReport:
    """Run the checks on ``corpus``, a list of derivable sequents (or (sequent, proof) pairs)."""
    from .prover import Derivable, SearchConfig, prove

    cfg = cfg or SearchConfig()
    rng = random.Random(seed)
    res = {k: PropertyResult(k) for k in ("id-generalization", "weakening", "invertibility", "contraction")}
    proofs = []
    for entry in corpus:
        s, proof = entry if isinstance(entry, tuple) else (entry, None)
        if proof is None:
            out = prove(s, cfg)
            if not isinstance(out, Derivable):
                continue
            proof = out.proof
        proofs.append((s, proof))

    logics = sorted({(s.logic, s.agents) for s, _ in proofs})
    for logic, agents in logics:
        for _ in range(id_formulas):
            f = random_formula(rng, logic, agents, 2)
            seq = Sequent((Labelled(0, f), Labelled(0, fm.negate(f))), logic, agents)
            r = res["id-generalization"]
            r.checked += 1
            if isinstance(prove(seq, cfg), Derivable):
                r.passed += 1
            else:
                r.failures.append(f"not derivable: {seq.text()}")

    for s, proof in proofs:
        table = rule_table(s.logic, s.agents)
        h = proof.height()
        extra = _random_extra(rng, s)
        _check_tree(res["weakening"], weaken(proof, extra, table), s.add(*extra), h, table, f"weaken {s.text()}")
        for t in dict.fromkeys(it for it in s.items if isinstance(it, Labelled)):
            rule = _rule_for(t.formula)
            if rule is None:
                continue
            for which in ((0, 1) if rule == "and" else (0,)):
                try:
                    tree = invert(proof, t, table, which)
                except Inconclusive:
                    res["invertibility"].inconclusive += 1
                    continue
                y = None
                if rule not in ("or", "and"):
                    y = _Fresh(_tree_labels(proof) | set(t.labels()))()
                _check_tree(res["invertibility"], tree, premise_of(s, t, y, which), h, table,
                            f"invert ({rule}) on {t.text()} in {s.text()}")
        # contraction: the sequent with a duplicated item against the sequent itself
        items = [it for it in s.items if isinstance(it, Labelled)]
        if items:
            dup = s.add(rng.choice(items))
            out = prove(dup, cfg)
            r = res["contraction"]
            if isinstance(out, Derivable):
                r.checked += 1
                if out.proof.height() < h:
                    r.failures.append(f"contraction {s.text()}: height {h} > {out.proof.height()}")
                else:
                    r.passed += 1
    return AdmissibilityReport(res)
