"""Relational models, frame conditions, model checking and a bounded model oracle.

Worlds are opaque ids. Internally each model indexes its worlds 0..n-1 and
keeps every relation as a list of successor bitmasks, so the truth set of a
formula is one int.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import Iterable, Iterator

from . import formula as fm
from .formula import Formula, fits_logic
from .sequent import AG, BOX, RG, RG_COMP, RH, RX, Equality, RelAtom, agent_tag, group_tag, tag_fits, tags_for


class SemanticsError(ValueError):
    pass


@dataclass
class RelationalModel:
    tier: str
    agents: int
    worlds: tuple
    relations: dict
    valuation: dict = field(default_factory=dict)
    frontier: frozenset = frozenset()

    def __post_init__(self):
        self.worlds = tuple(self.worlds)
        self.relations = {t: frozenset(tuple(p) for p in ps) for t, ps in self.relations.items()}
        self.valuation = {a: frozenset(ws) for a, ws in self.valuation.items()}
        self.frontier = frozenset(self.frontier)
        self._index = {w: k for k, w in enumerate(self.worlds)}
        if len(self._index) != len(self.worlds):
            raise SemanticsError("duplicate world ids")
        for tag, pairs in self.relations.items():
            if not tag_fits(tag, self.tier, self.agents):
                raise SemanticsError(f"relation {tag} does not belong to a {self.tier} model")
            for a, b in pairs:
                if a not in self._index or b not in self._index:
                    raise SemanticsError(f"relation {tag} mentions an unknown world")
        for atom, ws in self.valuation.items():
            if not ws <= set(self.worlds):
                raise SemanticsError(f"valuation of {atom} mentions an unknown world")
        self._succ: dict[str, list[int]] = {}

    # ---- relation access
    def pairs(self, tag: str) -> frozenset:
        if tag in self.relations:
            return self.relations[tag]
        if tag == RG_COMP and self.tier == "tstit":
            rg = self.pairs(RG)
            return frozenset((a, b) for a in self.worlds for b in self.worlds if (a, b) not in rg)
        if tag == RH and self.tier == "tstit":
            return frozenset((b, a) for a, b in self.pairs(RG))
        return frozenset()

    def holds(self, tag: str, a, b) -> bool:
        return (a, b) in self.pairs(tag)

    def successors(self, tag: str, w) -> set:
        return {b for a, b in self.pairs(tag) if a == w}

    def index(self, w) -> int:
        return self._index[w]

    def succ_masks(self, tag: str) -> list[int]:
        masks = self._succ.get(tag)
        if masks is None:
            masks = [0] * len(self.worlds)
            for a, b in self.pairs(tag):
                masks[self._index[a]] |= 1 << self._index[b]
            self._succ[tag] = masks
        return masks

    def atom_mask(self, name: str) -> int:
        mask = 0
        for w in self.valuation.get(name, ()):
            mask |= 1 << self._index[w]
        return mask

    def with_valuation(self, valuation: dict) -> "RelationalModel":
        return RelationalModel(self.tier, self.agents, self.worlds, self.relations, valuation, self.frontier)

    # ---- serialisation
    def to_json(self) -> dict:
        def wname(w):
            return w if isinstance(w, str) else f"w{w}"

        return {
            "tier": self.tier,
            "agents": self.agents,
            "worlds": [wname(w) for w in self.worlds],
            "relations": {t: sorted([wname(a), wname(b)] for a, b in ps) for t, ps in sorted(self.relations.items())},
            "valuation": {a: sorted(wname(w) for w in ws) for a, ws in sorted(self.valuation.items())},
            "frontier": sorted(wname(w) for w in self.frontier),
        }

    @classmethod
    def from_json(cls, data: dict | str, tier: str | None = None) -> "RelationalModel":
        if isinstance(data, str):
            data = json.loads(data)
        tier = tier or data["tier"]
        relations = {}
        for tag, pairs in data.get("relations", {}).items():
            if tag.startswith("R{"):
                members = [m for m in tag[2:-1].replace(" ", "").split(",") if m]
                tag = group_tag(int(m) for m in members)
            relations[tag] = [tuple(p) for p in pairs]
        return cls(
            tier=tier,
            agents=int(data.get("agents", 1)),
            worlds=data["worlds"],
            relations=relations,
            valuation=data.get("valuation", {}),
            frontier=data.get("frontier", []),
        )


# ------------------------------------------------------------ model checking

def _tag_of(f: Formula) -> str:
    kind = type(f)
    if kind in (fm.Box, fm.Diamond):
        return BOX
    if kind in (fm.Stit, fm.StitDual):
        return agent_tag(f.agent)
    if kind in (fm.AgStit, fm.AgStitDual):
        return AG
    if kind in (fm.G, fm.F):
        return RG
    if kind in (fm.H, fm.P):
        return RH
    if kind in (fm.XStit, fm.XStitDual):
        return group_tag(f.group)
    return RX


_UNIVERSAL = (fm.Box, fm.Stit, fm.AgStit, fm.G, fm.H, fm.XStit, fm.Next)


def extension(m: RelationalModel, f: Formula, cache: dict | None = None) -> int:
    """Bitmask of the worlds of ``m`` at which ``f`` holds."""
    if cache is None:
        cache = {}
    hit = cache.get(f)
    if hit is not None:
        return hit
    n = len(m.worlds)
    full = (1 << n) - 1
    kind = type(f)
    if kind is fm.PosAtom:
        out = m.atom_mask(f.name)
    elif kind is fm.NegAtom:
        out = full & ~m.atom_mask(f.name)
    elif kind is fm.And:
        out = extension(m, f.left, cache) & extension(m, f.right, cache)
    elif kind is fm.Or:
        out = extension(m, f.left, cache) | extension(m, f.right, cache)
    else:
        body = extension(m, f.body, cache)
        succ = m.succ_masks(_tag_of(f))
        out = 0
        if isinstance(f, _UNIVERSAL):
            for k in range(n):
                if succ[k] & ~body == 0:
                    out |= 1 << k
        else:
            for k in range(n):
                if succ[k] & body:
                    out |= 1 << k
    cache[f] = out
    return out


def model_check(m: RelationalModel, w, f: Formula) -> bool:
    """Truth of ``f`` at world ``w`` by the satisfaction clauses."""
    if w not in m._index:
        raise SemanticsError(f"unknown world {w!r}")
    if not fits_logic(f, m.tier):
        raise SemanticsError(f"formula {fm.render(f)} is outside the {m.tier} language")
    return bool(extension(m, f) >> m.index(w) & 1)


def globally_true(m: RelationalModel, f: Formula) -> bool:
    return extension(m, f) == (1 << len(m.worlds)) - 1


def falsification_trace(m: RelationalModel, w, f: Formula, depth: int = 0) -> list[str]:
    """Explain, clause by clause, why ``f`` fails (or holds) at ``w``."""
    holds = model_check(m, w, f)
    pad = "  " * depth
    name = f"w{w}" if isinstance(w, int) else w
    lines = [f"{pad}{name} {'|=' if holds else '|/='} {fm.render(f)}"]
    if depth > 6:
        return lines
    kind = type(f)
    if kind in (fm.And, fm.Or):
        for c in (f.left, f.right):
            if model_check(m, w, c) == holds or kind is (fm.Or if not holds else fm.And):
                lines += falsification_trace(m, w, c, depth + 1)
    elif kind not in (fm.PosAtom, fm.NegAtom):
        tag = _tag_of(f)
        succ = sorted(m.successors(tag, w), key=m.index)
        universal = isinstance(f, _UNIVERSAL)
        for u in succ:
            value = model_check(m, u, f.body)
            # a universal fails at a counter-successor; an existential fails at every successor
            if (universal and not holds and not value) or (not universal and not holds):
                lines += falsification_trace(m, u, f.body, depth + 1)
                if universal:
                    break
        if not succ:
            lines.append(f"{pad}  (no {tag}-successors)")
    return lines


# ------------------------------------------------------- frame conditions

@dataclass
class ConditionResult:
    name: str
    ok: bool
    witness: tuple | None = None
    note: str = ""


@dataclass
class FrameReport:
    tier: str
    results: list

    @property
    def valid(self) -> bool:
        return all(r.ok for r in self.results)

    def failures(self) -> list:
        return [r for r in self.results if not r.ok]

    def get(self, name: str) -> ConditionResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def lines(self) -> list[str]:
        out = []
        for r in self.results:
            note = f" ({r.note})" if r.note else ""
            if r.ok:
                out.append(f"{r.name} ok{note}")
            else:
                where = f" at ({', '.join(str(x) for x in r.witness)})" if r.witness else ""
                out.append(f"{r.name} violated{where}{note}")
        return out

    def to_json(self) -> dict:
        return {
            "tier": self.tier,
            "valid": self.valid,
            "conditions": [
                {"name": r.name, "ok": r.ok, "witness": list(r.witness) if r.witness else None, "note": r.note}
                for r in self.results
            ],
        }


def _equivalence(name: str, W, rel: frozenset) -> ConditionResult:
    for w in W:
        if (w, w) not in rel:
            return ConditionResult(name, False, (w,), "not reflexive")
    for a, b in rel:
        if (b, a) not in rel:
            return ConditionResult(name, False, (a, b), "not symmetric")
    for a, b in rel:
        for c, d in rel:
            if b == c and (a, d) not in rel:
                return ConditionResult(name, False, (a, b, d), "not transitive")
    return ConditionResult(name, True)


def compose(r: frozenset, s: frozenset) -> frozenset:
    """Diagrammatic composition: (a, c) whenever a r b and b s c."""
    by_src: dict = {}
    for b, c in s:
        by_src.setdefault(b, set()).add(c)
    return frozenset((a, c) for a, b in r for c in by_src.get(b, ()))


def _succ_sets(W, rel) -> dict:
    out = {w: set() for w in W}
    for a, b in rel:
        out[a].add(b)
    return out


def _subset(name, r, s, note="") -> ConditionResult:
    for pair in sorted(r, key=repr):
        if pair not in s:
            return ConditionResult(name, False, pair, note)
    return ConditionResult(name, True)


def _ldm_conditions(m: RelationalModel) -> list:
    W = m.worlds
    box = m.pairs(BOX)
    out = [_equivalence("EQ(R[])", W, box)]
    for i in range(1, m.agents + 1):
        out.append(_equivalence(f"EQ(R{i})", W, m.pairs(agent_tag(i))))
    c1 = ConditionResult("C1", True)
    for i in range(1, m.agents + 1):
        r = _subset("C1", m.pairs(agent_tag(i)), box, f"R{i} not within R[]")
        if not r.ok:
            c1 = r
            break
    out.append(c1)
    out.append(_check_c2(m))
    return out


def _check_c2(m: RelationalModel) -> ConditionResult:
    box = m.pairs(BOX)
    succ = [_succ_sets(m.worlds, m.pairs(agent_tag(i))) for i in range(1, m.agents + 1)]
    for us in product(m.worlds, repeat=m.agents):
        if all((a, b) in box for a in us for b in us):
            common = set(m.worlds)
            for k, u in enumerate(us):
                common &= succ[k][u]
            if not common:
                return ConditionResult("C2", False, tuple(us), "agents' choices do not intersect")
    return ConditionResult("C2", True)


def _tstit_conditions(m: RelationalModel) -> list:
    W = m.worlds
    out = _ldm_conditions(m)
    box, ag, rg, rh = m.pairs(BOX), m.pairs(AG), m.pairs(RG), m.pairs(RH)
    out.append(_equivalence("EQ(RAg)", W, ag))
    agent_succ = [_succ_sets(W, m.pairs(agent_tag(i))) for i in range(1, m.agents + 1)]
    ag_succ = _succ_sets(W, ag)
    c3 = ConditionResult("C3", True)
    for w in W:
        meet = set(W)
        for s in agent_succ:
            meet &= s[w]
        if ag_succ[w] != meet:
            extra = sorted(ag_succ[w] ^ meet, key=repr)
            c3 = ConditionResult("C3", False, (w, extra[0]), "RAg(w) differs from the meet of the Ri(w)")
            break
    out.append(c3)
    trans = ConditionResult("G-trans", True)
    for a, b in sorted(rg, key=repr):
        for c, d in sorted(rg, key=repr):
            if b == c and (a, d) not in rg:
                trans = ConditionResult("G-trans", False, (a, b, d))
                break
        if not trans.ok:
            break
    out.append(trans)
    g_succ = _succ_sets(W, rg)
    serial = ConditionResult("G-serial", True, note="frontier exempt" if m.frontier else "")
    for w in W:
        if not g_succ[w] and w not in m.frontier:
            serial = ConditionResult("G-serial", False, (w,))
            break
    out.append(serial)
    conv = ConditionResult("H-converse", True)
    for a, b in sorted(rg, key=repr):
        if (b, a) not in rh:
            conv = ConditionResult("H-converse", False, (a, b), "RG pair lacks RH converse")
            break
    else:
        for a, b in sorted(rh, key=repr):
            if (b, a) not in rg:
                conv = ConditionResult("H-converse", False, (a, b), "RH pair lacks RG converse")
                break
    out.append(conv)
    for name, rel in (("C4", rg), ("C5", rh)):
        res = ConditionResult(name, True)
        s = _succ_sets(W, rel)
        for w in W:
            for u in sorted(s[w], key=repr):
                for v in sorted(s[w], key=repr):
                    if u != v and (u, v) not in rel and (v, u) not in rel:
                        res = ConditionResult(name, False, (w, u, v))
                        break
                if not res.ok:
                    break
            if not res.ok:
                break
        out.append(res)
    out.append(_subset("C6", compose(rg, box), compose(ag, rg)))
    c7 = ConditionResult("C7", True)
    for pair in sorted(box, key=repr):
        if pair in rg:
            c7 = ConditionResult("C7", False, pair)
            break
    out.append(c7)
    if RG_COMP in m.relations:
        comp = m.relations[RG_COMP]
        res = ConditionResult("Gc-complement", True)
        for a in W:
            for b in W:
                if ((a, b) in comp) == ((a, b) in rg):
                    res = ConditionResult("Gc-complement", False, (a, b))
                    break
            if not res.ok:
                break
        out.append(res)
    return out


def all_groups(agents: int) -> list:
    return [frozenset(c) for k in range(agents + 1) for c in combinations(range(1, agents + 1), k)]


def _xstit_conditions(m: RelationalModel) -> list:
    W = m.worlds
    box, rx = m.pairs(BOX), m.pairs(RX)
    out = [_equivalence("D1", W, box)]
    x_succ = _succ_sets(W, rx)
    d2 = ConditionResult("D2", True)
    for w in W:
        if len(x_succ[w]) == 0:
            d2 = ConditionResult("D2", False, (w,), "RX not serial")
            break
        if len(x_succ[w]) > 1:
            a, b = sorted(x_succ[w], key=repr)[:2]
            d2 = ConditionResult("D2", False, (w, a, b), "RX not deterministic")
            break
    out.append(d2)
    groups = all_groups(m.agents)
    empty, grand = frozenset(), frozenset(range(1, m.agents + 1))
    rel = {g: m.pairs(group_tag(g)) for g in groups}
    target_i = compose(box, rx)
    target_ii = compose(rx, box)
    out.append(_diff("D3(i)", rel[empty], target_i))
    out.append(_diff("D3(ii)", rel[grand], target_ii))
    d3iii = ConditionResult("D3(iii)", True)
    for a in groups:
        for b in groups:
            if b <= a:
                r = _subset("D3(iii)", rel[a], rel[b])
                if not r.ok:
                    d3iii = ConditionResult(
                        "D3(iii)", False, (fm.group_text(a), fm.group_text(b)) + r.witness,
                        "R_A not within R_B although B is a subset of A")
                    break
        if not d3iii.ok:
            break
    out.append(d3iii)
    out.append(check_d3iv(m))
    return out


def _diff(name, actual, target) -> ConditionResult:
    for pair in sorted(actual ^ target, key=repr):
        note = "extra pair" if pair in actual else "missing pair"
        return ConditionResult(name, False, pair, note)
    return ConditionResult(name, True)


def check_d3iv(m: RelationalModel) -> ConditionResult:
    """Independence of agents for disjoint groups, with a witness search for w4."""
    W = m.worlds
    box = m.pairs(BOX)
    box_succ = _succ_sets(W, box)
    groups = all_groups(m.agents)
    succ = {g: _succ_sets(W, m.pairs(group_tag(g))) for g in groups}
    for a in groups:
        for b in groups:
            if a & b:
                continue
            for w1 in W:
                for w2 in sorted(box_succ[w1], key=repr):
                    for w3 in sorted(box_succ[w1], key=repr):
                        if not any(succ[a][w4] <= succ[a][w2] and succ[b][w4] <= succ[b][w3]
                                   for w4 in box_succ[w1]):
                            return ConditionResult(
                                "D3(iv)", False, (fm.group_text(a), fm.group_text(b), w1, w2, w3),
                                "no world realises both choices")
    return ConditionResult("D3(iv)", True)


def validate_frame(m: RelationalModel) -> FrameReport:
    """Check the frame conditions of the model's tier by enumeration."""
    if not m.worlds:
        return FrameReport(m.tier, [ConditionResult("nonempty", False, (), "no worlds")])
    if m.tier == "ldm":
        return FrameReport("ldm", _ldm_conditions(m))
    if m.tier == "tstit":
        return FrameReport("tstit", _tstit_conditions(m))
    return FrameReport("xstit", _xstit_conditions(m))


# ------------------------------------------------------ bounded enumeration

def set_partitions(items: list) -> Iterator[list]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]
        yield [[first]] + part


def _partition_relation(blocks) -> frozenset:
    return frozenset((a, b) for blk in blocks for a in blk for b in blk)


def _refinements(block_list) -> Iterator[list]:
    """Every partition that refines the given partition."""
    choices = [list(set_partitions(list(b))) for b in block_list]
    for combo in product(*choices):
        yield [blk for parts in combo for blk in parts]


def _canonical(n: int, rels: list) -> tuple:
    best = None
    for perm in permutations(range(n)):
        key = tuple(tuple(sorted((perm[a], perm[b]) for a, b in r)) for r in rels)
        if best is None or key < best:
            best = key
    return best


def enumerate_frames(tier: str, agents: int, max_worlds: int, min_worlds: int = 1) -> Iterator[RelationalModel]:
    """Every frame-valid model (empty valuation) up to ``max_worlds`` worlds, modulo renaming."""
    if tier == "tstit":
        raise SemanticsError("Tstit frames are infinite; no finite enumeration exists")
    if tier not in ("ldm", "xstit"):
        raise SemanticsError(f"unknown tier {tier!r}")
    if max_worlds > 4:
        raise SemanticsError("the oracle is limited to 4 worlds")
    if agents < 1:
        raise SemanticsError("agent count must be at least 1")
    for n in range(min_worlds, max_worlds + 1):
        W = list(range(n))
        seen = set()
        gen = _ldm_frames(W, agents) if tier == "ldm" else _xstit_frames(W, agents)
        for rels in gen:
            tags = tags_for(tier, agents)
            key = _canonical(n, [rels[t] for t in tags])
            if key in seen:
                continue
            seen.add(key)
            m = RelationalModel(tier, agents, W, rels)
            yield m


def _ldm_frames(W, agents):
    for boxp in set_partitions(W):
        refinements = list(_refinements(boxp))
        box = _partition_relation(boxp)
        for combo in product(refinements, repeat=agents):
            rels = {BOX: box}
            for i, part in enumerate(combo, start=1):
                rels[agent_tag(i)] = _partition_relation(part)
            if _check_c2(RelationalModel("ldm", agents, W, rels)).ok:
                yield rels


def _xstit_frames(W, agents):
    groups = all_groups(agents)
    grand = frozenset(range(1, agents + 1))
    middle = [g for g in groups if g and g != grand]
    for boxp in set_partitions(W):
        box = _partition_relation(boxp)
        for images in product(W, repeat=len(W)):
            rx = frozenset((w, images[w]) for w in W)
            r_empty = compose(box, rx)
            r_grand = compose(rx, box)
            if not r_grand <= r_empty:
                continue
            slack = sorted(r_empty - r_grand)
            options = [frozenset(c) for k in range(len(slack) + 1) for c in combinations(slack, k)]
            for choice in product(options, repeat=len(middle)):
                chosen = {g: r_grand | extra for g, extra in zip(middle, choice)}
                if any(chosen[a] - chosen[b] for a in middle for b in middle if b < a):
                    continue
                rels = {BOX: box, RX: rx, group_tag(frozenset()): r_empty}
                if grand:
                    rels[group_tag(grand)] = r_grand
                for g in middle:
                    rels[group_tag(g)] = chosen[g]
                if check_d3iv(RelationalModel("xstit", agents, W, rels)).ok:
                    yield rels


def valuations(worlds, atom_names: Iterable[str]) -> Iterator[dict]:
    names = sorted(set(atom_names))
    n = len(worlds)
    for bits in product(range(1 << n), repeat=len(names)):
        yield {a: frozenset(worlds[k] for k in range(n) if b >> k & 1) for a, b in zip(names, bits)}


def enumerate_models(tier: str, agents: int, max_worlds: int, atom_names: Iterable[str] = ("p",)) -> Iterator[RelationalModel]:
    """Frame-valid models over ``atom_names``, every valuation of every enumerated frame."""
    names = sorted(set(atom_names))
    for frame in enumerate_frames(tier, agents, max_worlds):
        for val in valuations(frame.worlds, names):
            yield frame.with_valuation(val)


def valid_on_models(f: Formula, tier: str, agents: int, max_worlds: int) -> RelationalModel | None:
    """Brute-force validity check; returns a falsifying model (pointed at any failing world) or None."""
    names = sorted(fm.atoms(f)) or ["p"]
    for frame in enumerate_frames(tier, agents, max_worlds):
        for val in valuations(frame.worlds, names):
            m = frame.with_valuation(val)
            if not globally_true(m, f):
                return m
    return None


@lru_cache(maxsize=None)
def _frames(tier: str, agents: int, max_worlds: int) -> tuple:
    return tuple(enumerate_frames(tier, agents, max_worlds))


def sequent_countermodel(s, max_worlds: int = 3):
    """A (model, interpretation) falsifying sequent ``s``, or None if every model up to ``max_worlds`` satisfies it."""
    names = sorted({a for it in s.formulas for a in fm.atoms(it.formula)}) or ["p"]
    labels = sorted(s.labels)
    rels = [it for it in s.items if isinstance(it, RelAtom)]
    eqs = [it for it in s.items if isinstance(it, Equality)]
    forms = list(s.formulas)
    for frame in _frames(s.logic, s.agents, max_worlds):
        W = frame.worlds
        for val in valuations(W, names):
            m = frame.with_valuation(val)
            cache: dict = {}
            exts = [extension(m, it.formula, cache) for it in forms]
            for combo in product(range(len(W)), repeat=len(labels)):
                interp = {x: W[k] for x, k in zip(labels, combo)}
                if any(not m.holds(a.tag, interp[a.src], interp[a.dst]) for a in rels):
                    continue
                if any(interp[e.left] != interp[e.right] for e in eqs):
                    continue
                if not any(ext >> m.index(interp[it.label]) & 1 for ext, it in zip(exts, forms)):
                    return m, interp
    return None
