"""Countermodels from open branches: the quotient construction, completed and re-verified."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from . import formula as fm
from .semantics import RelationalModel, all_groups, compose, extension, validate_frame
from .sequent import (
    AG, BOX, RG, RG_COMP, RH, RX, Equality, Labelled, RelAtom, Sequent, agent_tag, group_tag, label_text, satisfies,
    tags_for,
)
from .unionfind import UnionFind


class CountermodelError(ValueError):
    pass


@dataclass
class BranchSnapshot:
    """Union of all items met along an open branch, with the root it extends."""

    items: tuple
    root: Sequent
    logic: str
    agents: int
    certificate: dict = field(default_factory=dict)


@dataclass
class ExtractionResult:
    model: RelationalModel
    interpretation: dict  # label -> world
    caveats: list
    items: tuple = ()  # the branch items the model must falsify

    def to_json(self) -> dict:
        return {
            "model": self.model.to_json(),
            "interpretation": {label_text(k): label_text(v) for k, v in sorted(self.interpretation.items())},
            "caveats": list(self.caveats),
        }


def _unsaturated(items) -> str | None:
    present = set(items)
    for it in items:
        if isinstance(it, Labelled) and isinstance(it.formula, fm.PosAtom):
            if Labelled(it.label, fm.NegAtom(it.formula.name)) in present:
                return f"(id) applies at {label_text(it.label)}"
        if isinstance(it, RelAtom) and it.tag == RG and RelAtom(RG_COMP, it.src, it.dst) in present:
            return f"(comp_G1) applies at {label_text(it.src)},{label_text(it.dst)}"
    return None


def _falsifies_all(model: RelationalModel, interp: dict, items) -> bool:
    cache: dict = {}
    for it in items:
        if isinstance(it, Labelled):
            if extension(model, it.formula, cache) >> model.index(interp[it.label]) & 1:
                return False
    return True


def _atoms_hold(model: RelationalModel, interp: dict, items) -> bool:
    for it in items:
        if isinstance(it, RelAtom) and not model.holds(it.tag, interp[it.src], interp[it.dst]):
            return False
        if isinstance(it, Equality) and interp[it.left] != interp[it.right]:
            return False
    return True


def extract(b: BranchSnapshot) -> ExtractionResult:
    """Quotient the branch by its equalities and read off relations and valuation."""
    reason = _unsaturated(b.items)
    if reason:
        raise CountermodelError(f"branch is not saturated: {reason}")
    uf = UnionFind()
    labels = sorted({x for it in b.items for x in it.labels()} | set(b.root.labels))
    for x in labels:
        uf.find(x)
    for it in b.items:
        if isinstance(it, Equality):
            uf.union(it.left, it.right)
    interp = {x: uf.find(x) for x in labels}
    worlds = sorted(set(interp.values()))
    rels: dict = {t: set() for t in tags_for(b.logic, b.agents) if t != RG_COMP}
    for it in b.items:
        if isinstance(it, RelAtom) and it.tag != RG_COMP:
            rels[it.tag].add((interp[it.src], interp[it.dst]))
    atoms = sorted({a for it in list(b.items) + list(b.root.items) if isinstance(it, Labelled)
                    for a in fm.atoms(it.formula)})
    valuation = {a: set() for a in atoms}
    for it in b.items:
        if isinstance(it, Labelled) and isinstance(it.formula, fm.NegAtom):
            valuation[it.formula.name].add(interp[it.label])
    caveats: list = []
    if b.logic == "ldm":
        model = RelationalModel("ldm", b.agents, worlds, rels, valuation)
    elif b.logic == "tstit":
        model, caveats = _tstit_model(b, worlds, rels, valuation, interp)
    else:
        model, caveats = _xstit_model(b, worlds, rels, valuation, interp)
    return ExtractionResult(model, interp, caveats, tuple(b.items))


def _tstit_model(b, worlds, rels, valuation, interp):
    caveats = []
    frontier = [w for w in worlds if not any(a == w for a, _ in rels[RG])]
    raw = RelationalModel("tstit", b.agents, worlds, rels, valuation, frontier)
    meet = None
    for i in range(1, b.agents + 1):
        r = rels[agent_tag(i)]
        meet = set(r) if meet is None else meet & r
    closed = dict(rels)
    closed[AG] = meet
    model = RelationalModel("tstit", b.agents, worlds, closed, valuation, frontier)
    if _falsifies_all(model, interp, b.items):
        caveats.append("R_Ag closure applied")
    else:
        model = raw
        caveats.append("C3 closure unverified")
    if frontier:
        caveats.append("tstit frontier worlds: " + ", ".join(label_text(w) for w in frontier))
    return model, caveats


def _xstit_relations(agents, worlds, base: dict) -> dict:
    """Recompute the group relations from R_[] and R_X as the frame conditions require."""
    rels = {t: set(v) for t, v in base.items()}
    box, rx = frozenset(rels[BOX]), frozenset(rels[RX])
    empty, grand = frozenset(), frozenset(range(1, agents + 1))
    rag = set(compose(rx, box))
    rels[group_tag(grand)] = rag | rels[group_tag(grand)]
    rels[group_tag(empty)] = set(compose(box, rx)) | rels[group_tag(empty)]
    for g in all_groups(agents):
        if g not in (empty, grand):
            rels[group_tag(g)] |= rag
    return rels


def _xstit_model(b, worlds, rels, valuation, interp):
    caveats = []
    nxt = {}
    for a, c in sorted(rels[RX]):
        nxt.setdefault(a, c)
    missing = [w for w in worlds if w not in nxt]
    current = {t: set(v) for t, v in rels.items()}

    # complete moment by moment: classmates' next states first, then loops, then any world
    moments = []
    for w in missing:
        cls = sorted(v for u, v in rels[BOX] if u == w) or [w]
        if cls not in moments:
            moments.append(cls)
    for cls in moments:
        todo = [w for w in cls if w not in nxt]
        images = list(dict.fromkeys(nxt[u] for u in cls if u in nxt))
        chosen = None
        for k, pairs in enumerate(_assignments(todo, images, worlds)):
            if k >= 2000:
                break
            trial = {t: set(v) for t, v in current.items()}
            trial[RX] |= set(pairs)
            full = _xstit_relations(b.agents, worlds, trial)
            if _moment_ok(b.agents, cls, full) and \
                    _falsifies_all(RelationalModel("xstit", b.agents, worlds, full, valuation), interp, b.items):
                chosen = trial
                break
        if chosen is None:
            raise CountermodelError("no successor states for " + ", ".join(label_text(w) for w in todo)
                                    + " keep the branch falsified")
        current = chosen
        nxt.update((a, c) for a, c in current[RX] if a not in nxt)
    if missing:
        caveats.append("next-state completion: " + ", ".join(label_text(w) for w in missing))
    full = _xstit_relations(b.agents, worlds, current)
    full, repaired = _repair_d3iv(b, worlds, full, valuation, interp)
    if repaired:
        caveats.append(f"IOA^x completion: {repaired} choice extension(s)")
    return RelationalModel("xstit", b.agents, worlds, full, valuation), caveats


def _assignments(todo, images, worlds):
    """Next-state choices for ``todo``: a shared classmate image, shared self-loops, then every combination."""
    seen = set()
    firsts = [[(w, t) for w in todo] for t in images] + [[(w, w) for w in todo]]
    order = images + [w for w in worlds if w not in images]
    for pairs in firsts:
        key = tuple(pairs)
        if key not in seen:
            seen.add(key)
            yield pairs
    for combo in product(order, repeat=len(todo)):
        pairs = list(zip(todo, combo))
        key = tuple(pairs)
        if key not in seen:
            seen.add(key)
            yield pairs


def _moment_ok(agents, cls, rels) -> bool:
    """D3(i)-(iii) restricted to sources in ``cls``."""
    box, rx = frozenset(rels[BOX]), frozenset(rels[RX])
    local = set(cls)
    r0 = {p for p in compose(box, rx) if p[0] in local}
    rag = {p for p in compose(rx, box) if p[0] in local}
    groups = all_groups(agents)
    mine = {g: {p for p in rels[group_tag(g)] if p[0] in local} for g in groups}
    if mine[frozenset()] != r0 or mine[frozenset(range(1, agents + 1))] != rag:
        return False
    return all(mine[a] <= mine[b] for a in groups for b in groups if b <= a)


def _extend(rels, group, w, targets, agents):
    """Add (w, t) to R_group and to every subgroup relation, keeping D3(iii)."""
    for g in all_groups(agents):
        if g <= group:
            rels[group_tag(g)] |= {(w, t) for t in targets}


def _repair_d3iv(b, worlds, rels, valuation, interp, limit: int = 200):
    """Give each (A, B, w2, w3) violation a witness w4 by copying its choices upward, as (IOA-U1)/(IOA-U2) do."""
    from .semantics import check_d3iv

    done = 0
    while done < limit:
        m = RelationalModel("xstit", b.agents, worlds, rels, valuation)
        res = check_d3iv(m)
        if res.ok:
            return rels, done
        a_txt, b_txt, w1, w2, w3 = res.witness
        ga = fm.canonical_group(x for x in a_txt.strip("{}").split(",") if x)
        gb = fm.canonical_group(x for x in b_txt.strip("{}").split(",") if x)
        cls = sorted(v for u, v in rels[BOX] if u == w1)
        fixed = None
        for w4 in [w2, w3] + [v for v in cls if v not in (w2, w3)]:
            trial = {t: set(v) for t, v in rels.items()}
            _extend(trial, ga, w2, {t for u, t in trial[group_tag(ga)] if u == w4}, b.agents)
            _extend(trial, gb, w3, {t for u, t in trial[group_tag(gb)] if u == w4}, b.agents)
            if trial == rels:
                continue
            if _falsifies_all(RelationalModel("xstit", b.agents, worlds, trial, valuation), interp, b.items):
                fixed = trial
                break
        if fixed is None:
            raise CountermodelError(
                f"no witness realises {a_txt} at {label_text(w2)} with {b_txt} at {label_text(w3)}")
        rels = fixed
        done += 1
    raise CountermodelError("IOA^x completion did not converge")


def verify(r: ExtractionResult, root: Sequent) -> bool:
    """Root falsified, every branch formula falsified, branch atoms hold, frame valid up to caveats."""
    model, interp = r.model, r.interpretation
    if any(x not in interp for x in root.labels):
        return False
    if satisfies(model, interp, root):
        return False
    if not _falsifies_all(model, interp, r.items) or not _atoms_hold(model, interp, r.items):
        return False
    excused = {"C3"} if "C3 closure unverified" in r.caveats else set()
    report = validate_frame(model)
    return all(res.ok or res.name in excused for res in report.results)
