"""Bounded backward proof search over the labelled calculi.

The search builds a reduction tree depth-first. Each branch is saturated in a
fixed priority order: equality handling, (or), retention and non-creating
geometric rules, box-like rules, (and), label-creating geometric rules
(oldest labels first), and finally the branching connectedness rules. An
instance is skipped when every item it would add is already in the branch
history; rules that create a label are skipped when an existing label
already witnesses what they would add. Found proofs are pruned of unused
steps and re-checked against the rule table before they are returned.
"""

from __future__ import annotations

import heapq
import random
import sys
from collections import Counter
from dataclasses import dataclass, field
from itertools import product

from . import formula as fm
from .calculus import (
    PEq, PRel, RuleSchema, SystemObligation, build_item, rule_table, table_index,
)
from .proof import ProofTree, check_discipline, check_proof, premise_sequents
from .semantics import _tag_of
from .sequent import (
    AG, BOX, RG, RG_COMP, RH, RX, Equality, Labelled, RelAtom, Sequent, agent_tag, group_tag, label_text,
)

EQ_TAG = "="

UNIVERSAL = {fm.Box: "box", fm.Stit: "stit", fm.AgStit: "ag", fm.G: "G", fm.H: "H", fm.XStit: "xstit", fm.Next: "next"}
EXISTENTIAL = {
    fm.Diamond: "dia", fm.StitDual: "stit_dual", fm.AgStitDual: "ag_dual", fm.F: "F", fm.P: "P",
    fm.XStitDual: "xstit_dual", fm.NextDual: "next_dual",
}

CAT_EQ, CAT_OR, CAT_GEO, CAT_UNIV, CAT_AND, CAT_BRANCH = 0, 1, 2, 3, 4, 6

GEO_NONCREATING = {
    "eucl_box", "eucl_stit", "br_stit", "eucl_ag", "agd", "conv_G", "conv_H", "trans_G", "irr_G",
    "eucl_eq", "det_X", "C-Mon", "Eff0", "EffAg",
}
FREE_REFL = {"refl_box", "refl_stit", "refl_ag"}


@dataclass(frozen=True)
class SearchConfig:
    fuel: int = 100000
    max_labels: int = 64
    ioa_policy: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("fuel", "max_labels", "ioa_policy"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass
class Derivable:
    proof: ProofTree
    stats: dict = field(default_factory=dict)
    verdict: str = "Derivable"


@dataclass
class Refuted:
    branch: Sequent
    snapshot: object  # countermodel.BranchSnapshot
    extraction: object  # countermodel.ExtractionResult
    stats: dict = field(default_factory=dict)
    verdict: str = "Refuted"

    @property
    def partial(self) -> bool:
        return bool(self.extraction.model.frontier)


@dataclass
class Unknown:
    reason: str
    stats: dict = field(default_factory=dict)
    branch: Sequent | None = None
    verdict: str = "Unknown"


SearchOutcome = Derivable | Refuted | Unknown


def op_params(f) -> tuple:
    if isinstance(f, (fm.Stit, fm.StitDual)):
        return (("i", f.agent),)
    if isinstance(f, (fm.XStit, fm.XStitDual)):
        return (("A", f.group),)
    return ()


class _FuelOut(Exception):
    pass


# ------------------------------------------------------------------ branch


class Branch:
    """Mutable search state of one branch of the reduction tree."""

    def __init__(self, engine: "_Engine"):
        self.engine = engine
        self.counts: Counter = Counter()
        self.history: set = set()
        self.succ: dict = {}
        self.pred: dict = {}
        self.forms: dict = {}  # label -> Counter of present formulas
        self.by_label: dict = {}  # label -> set of present items mentioning it
        self.labels: set = set()
        self.gen: dict = {}
        self.parent: dict = {}  # uf parent
        self.queue: list = []
        self.seq = 0
        self.seen: set = set()
        self.obligations: list = []
        self.ioa_done: set = set()
        self.deferred: list = []  # box-like instances waiting for a fresh label
        self.witnessed: set = set()  # labels created by a box-like rule
        self.bore: set = set()  # labels that have carried a formula
        self.mutations = 0
        self.urgent_cache = None
        self.bounds: list = []
        self.closed = None
        self.steps: list = []  # (schema, labels, formulas, principal, delta)

    def copy(self) -> "Branch":
        b = Branch.__new__(Branch)
        b.engine = self.engine
        b.counts = self.counts.copy()
        b.history = set(self.history)
        b.succ = {t: {k: set(v) for k, v in d.items()} for t, d in self.succ.items()}
        b.pred = {t: {k: set(v) for k, v in d.items()} for t, d in self.pred.items()}
        b.forms = {k: v.copy() for k, v in self.forms.items()}
        b.by_label = {k: set(v) for k, v in self.by_label.items()}
        b.labels = set(self.labels)
        b.gen = dict(self.gen)
        b.parent = dict(self.parent)
        b.queue = list(self.queue)
        b.seq = self.seq
        b.seen = set(self.seen)
        b.obligations = list(self.obligations)
        b.ioa_done = set(self.ioa_done)
        b.deferred = list(self.deferred)
        b.witnessed = set(self.witnessed)
        b.bore = set(self.bore)
        b.mutations = self.mutations
        b.urgent_cache = self.urgent_cache
        b.bounds = list(self.bounds)
        b.closed = None
        b.steps = []
        return b

    # ---- union-find over labels
    def find(self, x):
        root = x
        while self.parent.get(root, root) != root:
            root = self.parent[root]
        while self.parent.get(x, x) != root:
            nxt = self.parent[x]
            self.parent[x] = root
            x = nxt
        return root

    def normal(self, item) -> bool:
        return all(self.find(x) == x for x in item.labels())

    # ---- queries
    def succs(self, tag, x) -> list:
        return sorted(y for y in self.succ.get(tag, {}).get(x, ()) if self.find(y) == y)

    def preds(self, tag, y) -> list:
        return sorted(x for x in self.pred.get(tag, {}).get(y, ()) if self.find(x) == x)

    def raw_succs(self, tag, x) -> list:
        return sorted(self.succ.get(tag, {}).get(x, ()))

    def raw_preds(self, tag, y) -> list:
        return sorted(self.pred.get(tag, {}).get(y, ()))

    def has(self, tag, x, y) -> bool:
        return y in self.succ.get(tag, {}).get(x, ())

    def current(self, root: Sequent) -> Sequent:
        return Sequent(tuple(self.counts.elements()), root.logic, root.agents).sorted()

    # ---- queue
    def push(self, cat, key, cand):
        if key in self.seen:
            return
        self.seen.add(key)
        self.seq += 1
        # (and) splits newest first, everything else oldest first
        heapq.heappush(self.queue, (cat, -self.seq if cat == CAT_AND else self.seq, cand))

    # ---- item addition and indexing
    def add_item(self, item, gen_hint=0):
        self.mutations += 1
        self.counts[item] += 1
        first = item not in self.history
        self.history.add(item)
        for x in item.labels():
            if x not in self.labels:
                self.labels.add(x)
                self.gen.setdefault(x, gen_hint)
                self.engine.on_new_label(self, x)
            self.by_label.setdefault(x, set()).add(item)
        if isinstance(item, RelAtom):
            tag, a, b = item.tag, item.src, item.dst
        elif isinstance(item, Equality):
            tag, a, b = EQ_TAG, item.left, item.right
        else:
            self.forms.setdefault(item.label, Counter())[item.formula] += 1
            self.bore.add(item.label)
            self.engine.on_formula(self, item)
            return
        if b in self.succ.setdefault(tag, {}).setdefault(a, set()) and not first:
            return
        self.succ[tag][a].add(b)
        self.pred.setdefault(tag, {}).setdefault(b, set()).add(a)
        if tag == EQ_TAG:
            self.engine.on_equality(self, item)
        else:
            self.engine.on_relation(self, item)

    def remove_item(self, item):
        self.mutations += 1
        self.counts[item] -= 1
        if self.counts[item] <= 0:
            del self.counts[item]
            if isinstance(item, Labelled):
                c = self.forms[item.label]
                c[item.formula] -= 1
                if c[item.formula] <= 0:
                    del c[item.formula]
        elif isinstance(item, Labelled):
            self.forms[item.label][item.formula] -= 1


# ------------------------------------------------------------------ engine


class _Engine:
    def __init__(self, logic: str, agents: int, cfg: SearchConfig, allow_ioax: bool = True):
        self.logic, self.agents, self.cfg = logic, agents, cfg
        self.table = rule_table(logic, agents)
        self.index = table_index(self.table)
        self.allow_ioax = allow_ioax
        self.fuel = cfg.fuel
        self.used = 0
        self.rng = random.Random(cfg.seed)
        self.triggers: dict = {}
        for schema in self.table:
            if schema.name not in GEO_NONCREATING and schema.name not in ("conn_G", "conn_H") \
                    and not schema.name.startswith("IOA-U"):
                continue
            for k, pat in enumerate(schema.conclusion):
                tag = pat.tag if isinstance(pat, PRel) else EQ_TAG
                self.triggers.setdefault(tag, []).append((schema, k))
        self.ioa_schemas = {}
        for schema in self.table:
            if schema.name == "IOA":
                self.ioa_schemas[self._ioa_shape(schema)] = schema
        self.refl = [s for s in self.table if s.name in FREE_REFL]

    @staticmethod
    def _ioa_shape(schema) -> tuple:
        us = [p.dst for p in schema.conclusion]
        return tuple(us)

    # ---- triggers
    def on_new_label(self, br: Branch, x):
        for schema in self.refl:
            self._push_schema(br, CAT_GEO, schema, {"w": x}, {}, ())

    def on_formula(self, br: Branch, item: Labelled):
        f, w = item.formula, item.label
        if isinstance(f, (fm.PosAtom, fm.NegAtom)):
            other = fm.NegAtom(f.name) if isinstance(f, fm.PosAtom) else fm.PosAtom(f.name)
            if br.counts.get(Labelled(w, other)):
                pos, neg = (item, Labelled(w, other)) if isinstance(f, fm.PosAtom) else (Labelled(w, other), item)
                br.closed = (self.index[("id", ())], {"w": w}, {"atom:p": f.name}, (pos, neg))
        t = type(f)
        if t is fm.Or:
            self._push_logical(br, CAT_OR, "or", (), item, {"w": w}, {"phi": f.left, "psi": f.right})
        elif t is fm.And:
            self._push_logical(br, CAT_AND, "and", (), item, {"w": w}, {"phi": f.left, "psi": f.right})
        elif t in UNIVERSAL:
            self._push_logical(br, CAT_UNIV, UNIVERSAL[t], op_params(f), item, {"w": w}, {"phi": f.body})
        elif t in EXISTENTIAL:
            tag = _tag_of(f)
            for u in br.succs(tag, w):
                self._push_existential(br, item, RelAtom(tag, w, u))
        self._check_sub(br, item)

    def on_relation(self, br: Branch, atom: RelAtom):
        tag, a, b = atom.tag, atom.src, atom.dst
        if tag in (RG, RG_COMP):
            other = RelAtom(RG_COMP if tag == RG else RG, a, b)
            if br.counts.get(other):
                pair = (atom, other) if tag == RG else (other, atom)
                br.closed = (self.index[("comp_G1", ())], {"w": a, "u": b}, {}, pair)
        for f, n in list(br.forms.get(a, {}).items()):
            if n > 0 and type(f) in EXISTENTIAL and _tag_of(f) == tag:
                self._push_existential(br, Labelled(a, f), atom)
        self._geo_triggers(br, atom, tag)
        for ob in br.obligations:
            if a != ob.anchor[3]:
                continue
            for which, group in (("IOA-U1", ob.A), ("IOA-U2", ob.B)):
                if tag == group_tag(group):
                    schema = self.index[(which, ob.params)]
                    lb = ob.anchor_binding()
                    lb["w5" if which == "IOA-U1" else "w6"] = b
                    self._push_schema(br, CAT_GEO, schema, lb, {}, (atom,))
        self._check_sub(br, atom)

    def on_equality(self, br: Branch, eq: Equality):
        a, b = eq.left, eq.right
        ra, rb = br.find(a), br.find(b)
        if ra != rb:
            lo, hi = min(ra, rb), max(ra, rb)
            br.parent[hi] = lo
        schema = self.index[("refl_eq", ())]
        for x in (a, b):
            self._push_schema(br, CAT_EQ, schema, {"w": x}, {}, ())
        self._geo_triggers(br, eq, EQ_TAG)
        # items mentioning a now non-representative label get copied to the representative
        for v in (a, b):
            r = br.find(v)
            if v != r and br.counts.get(Equality(v, r)):
                for item in sorted(br.by_label.get(v, ()), key=_ikey):
                    if br.counts.get(item) and not isinstance(item, Equality):
                        self._push_sub(br, v, r, item)

    def _check_sub(self, br: Branch, item):
        for x in item.labels():
            r = br.find(x)
            if r != x and br.counts.get(Equality(x, r)):
                self._push_sub(br, x, r, item)
                return

    def _push_sub(self, br, v, r, item):
        schema = self.index[("sub_eq", ())]
        br.push(CAT_EQ, ("sub", v, r, item), (schema, {"w": v, "u": r}, {}, (Equality(v, r),), (item,)))

    def _push_logical(self, br, cat, name, params, item, lb, fb):
        schema = self.index[(name, params)]
        br.seq += 1
        heapq.heappush(br.queue, (cat, br.seq, (schema, lb, fb, (item,), ())))

    def _push_existential(self, br, lab: Labelled, atom: RelAtom):
        f = lab.formula
        schema = self.index[(EXISTENTIAL[type(f)], op_params(f))]
        self._push_schema(br, CAT_GEO, schema, {"w": lab.label, "u": atom.dst}, {"phi": f.body}, (atom, lab))

    def _push_schema(self, br, cat, schema, lb, fb, principal, delta=()):
        key = (schema.key, tuple(sorted(lb.items())), principal)
        br.push(cat, key, (schema, lb, fb, principal, delta))

    def _geo_triggers(self, br: Branch, item, tag):
        for schema, k in self.triggers.get(tag, ()):
            if schema.context_vars:
                continue
            lb = _bind(schema.conclusion[k], item, {})
            if lb is None:
                continue
            for lb2, items in self._join(br, schema.conclusion, k, item, lb):
                self._push_schema(br, CAT_BRANCH if len(schema.premises) > 1 else CAT_GEO, schema, lb2, {}, items)

    def _join(self, br: Branch, pats, fixed_k, fixed_item, lb):
        order = [k for k in range(len(pats)) if k != fixed_k]
        chosen = {fixed_k: fixed_item}

        def rec(j, lb):
            if j == len(order):
                items = tuple(chosen[k] for k in range(len(pats)))
                if len(set(items)) == len(items):
                    yield lb, items
                return
            k = order[j]
            pat = pats[k]
            tag = pat.tag if isinstance(pat, PRel) else EQ_TAG
            s, d = (pat.src, pat.dst) if isinstance(pat, PRel) else (pat.left, pat.right)
            sv, dv = lb.get(s), lb.get(d)
            # equalities join over all labels, relations over representatives only
            succs, preds = (br.raw_succs, br.raw_preds) if tag == EQ_TAG else (br.succs, br.preds)
            if sv is not None and dv is not None:
                cands = [(sv, dv)] if br.has(tag, sv, dv) else []
            elif sv is not None:
                cands = [(sv, y) for y in succs(tag, sv)]
            elif dv is not None:
                cands = [(x, dv) for x in preds(tag, dv)]
            else:
                cands = [(x, y) for x in sorted(br.succ.get(tag, {})) for y in succs(tag, x)]
            for x, y in cands:
                if tag != EQ_TAG and (br.find(x) != x or br.find(y) != y):
                    continue
                if s == d and x != y:
                    continue
                lb2 = dict(lb)
                lb2[s], lb2[d] = x, y
                if lb2[s] != x or lb2[d] != y:
                    continue
                chosen[k] = RelAtom(tag, x, y) if tag != EQ_TAG else Equality(x, y)
                yield from rec(j + 1, lb2)
            chosen.pop(k, None)

        if not br.normal(fixed_item) and tag_of_item(fixed_item) != EQ_TAG:
            return
        yield from rec(0, lb)

    # ---- firing
    def fresh(self, br: Branch, n: int) -> list:
        start = max(br.labels | {-1}) + 1
        return list(range(start, start + n))

    def spend(self):
        self.used += 1
        if self.used > self.fuel:
            raise _FuelOut()

    def apply(self, br: Branch, schema: RuleSchema, lb: dict, fb: dict, principal: tuple, delta=(), gen=0):
        """Apply a unary rule in place."""
        self.spend()
        built = self._built(schema, lb, fb, principal, delta)[0]
        br.steps.append((schema, dict(lb), dict(fb), principal, delta))
        rest = Counter(built)
        for it in principal:
            if rest[it] > 0:
                rest[it] -= 1
            else:
                br.remove_item(it)
        for it in built:
            if rest[it] > 0:
                rest[it] -= 1
                br.add_item(it, gen)

    def _built(self, schema, lb, fb, principal, delta) -> list:
        if schema.is_substitution:
            from .sequent import rename_item

            return [list(principal) + [rename_item(d, {lb["w"]: lb["u"]}) for d in delta]]
        return [[build_item(p, lb, fb) for p in prem] for prem in schema.premises]

    def redundant(self, br: Branch, schema, lb, fb, principal, delta) -> bool:
        for prem in self._built(schema, lb, fb, principal, delta):
            extra = Counter(prem)
            extra.subtract(Counter(principal))
            if all(it in br.history for it, n in extra.items() if n > 0):
                return True
        return False

    def valid_now(self, br: Branch, schema, lb, principal, delta) -> bool:
        need = Counter(principal) + Counter(delta)
        if any(br.counts.get(it, 0) < n for it, n in need.items()):
            return False
        if schema.name in ("sub_eq", "refl_eq", "eucl_eq"):
            return True
        return all(br.normal(it) for it in principal) and all(br.find(x) == x for x in lb.values())

    def witness(self, br: Branch, tag, w, formula) -> bool:
        return any(Labelled(y, formula) in br.history for y in br.succs(tag, w))

    def label_budget(self, br: Branch, n: int) -> bool:
        if len(br.labels) + n > self.cfg.max_labels:
            if "label budget" not in br.bounds:
                br.bounds.append("label budget")
            return False
        return True

    def urgent_candidates(self, br: Branch) -> list:
        """Goal-directed (IOA)/(IOA-E) instances; recomputed only after the branch changed."""
        key = (br.mutations, len(br.ioa_done))
        if br.urgent_cache is not None and br.urgent_cache[0] == key:
            return br.urgent_cache[1]
        labels = sorted(x for x in br.labels if br.find(x) == x)
        if self.logic in ("ldm", "tstit"):
            cands = self._ioa_candidates(br, labels)
        elif self.allow_ioax:
            cands = self._ioa_e_candidates(br, labels)
        else:
            cands = []
        out = [c for c in cands if c[1] < 5]
        br.urgent_cache = (key, out)
        return out

    # ---- creating geometric rules, scanned when everything else is saturated
    def creating_candidates(self, br: Branch) -> list:
        out = []
        labels = sorted(x for x in br.labels if br.find(x) == x)
        logic = self.logic
        if logic in ("ldm", "tstit"):
            out += self._ioa_candidates(br, labels)
        if logic == "tstit":
            for w in labels:
                if any(type(f) is fm.F for f, n in br.forms.get(w, {}).items() if n > 0) and not br.succs(RG, w):
                    out.append(((w,), 1, self.index[("ser_G", ())], {"w": w}, ()))
            for w in labels:
                for u in br.succs(RG, w):
                    for z in br.succs(BOX, u):
                        if any(br.has(RG, v, z) for v in br.succs(AG, w)):
                            continue
                        out.append(((w, u, z), 2, self.index[("ncuh", ())], {"w": w, "u": u, "z": z},
                                    (RelAtom(RG, w, u), RelAtom(BOX, u, z))))
        if logic == "xstit":
            empty, grand = frozenset(), frozenset(range(1, self.agents + 1))
            r0, rag = group_tag(empty), group_tag(grand)
            for w in labels:
                needs = any(type(f) in (fm.NextDual, fm.XStitDual) for f, n in br.forms.get(w, {}).items() if n > 0)
                if needs and not br.succs(RX, w):
                    out.append(((w,), 1, self.index[("ser_X", ())], {"w": w}, ()))
            def bears(w, u):
                # a bare label inside w's own moment would start an endless chain of preimages;
                # those are left to the next-state completion of the countermodel
                return u in br.bore or not br.has(BOX, w, u)

            for w in labels:
                for u in br.succs(r0, w):
                    if bears(w, u) and not any(br.has(RX, v, u) for v in br.succs(BOX, w)):
                        out.append(((w, u), 2, self.index[("0Eff", ())], {"w": w, "u": u}, (RelAtom(r0, w, u),)))
                for u in br.succs(rag, w):
                    if bears(w, u) and not any(br.has(BOX, v, u) for v in br.succs(RX, w)):
                        out.append(((w, u), 3, self.index[("AgEff", ())], {"w": w, "u": u}, (RelAtom(rag, w, u),)))
            if self.allow_ioax:
                out += self._ioa_e_candidates(br, labels)
        return out

    def _ioa_candidates(self, br: Branch, labels) -> list:
        out = []
        n = self.agents
        for c in labels:
            cls = br.succs(BOX, c)
            if not cls or min(cls) != c or c not in cls:
                continue
            for tup in product(cls, repeat=n):
                if len(set(tup)) == 1 or tup in br.ioa_done:
                    continue
                common = None
                for i, u in enumerate(tup, start=1):
                    s = set(br.succs(agent_tag(i), u))
                    common = s if common is None else common & s
                    if not common:
                        break
                if common:
                    continue
                if max(br.gen.get(u, 0) for u in tup) > self.cfg.ioa_policy:
                    if "ioa-policy" not in br.bounds:
                        br.bounds.append("ioa-policy")
                    continue
                shape, lb, first = [], {"w": c}, {}
                for i, u in enumerate(tup, start=1):
                    name = first.setdefault(u, f"u{i}")
                    shape.append(name)
                    lb[name] = u
                schema = self.ioa_schemas.get(tuple(shape))
                if schema is None:
                    continue
                principal = tuple(build_item(p, lb, {}) for p in schema.conclusion)
                out.append((tuple(sorted(set(tup))), 0 if self._useful(br, tup) else 5, schema, lb, principal, tup))
        return out

    def _useful(self, br: Branch, tup) -> bool:
        """At least two agents' choice cells carry a formula about that agent's choice."""
        hits = 0
        for i, u in enumerate(tup, start=1):
            tag = agent_tag(i)
            if any(type(f) is fm.StitDual and f.agent == i
                   for y in br.succs(tag, u) for f, n in br.forms.get(y, {}).items() if n > 0):
                hits += 1
        return hits >= 2

    def _ioa_e_candidates(self, br: Branch, labels) -> list:
        out = []
        groups = [g for g in _groups(self.agents) if g]
        for c in labels:
            cls = br.succs(BOX, c)
            if not cls or min(cls) != c or c not in cls:
                continue
            if not any(type(f) is fm.Diamond for y in cls for f, n in br.forms.get(y, {}).items() if n > 0):
                continue
            duals = {y: {f.group for f, n in br.forms.get(y, {}).items() if n > 0 and type(f) is fm.XStitDual}
                     for y in cls}
            for w2 in cls:
                for w3 in cls:
                    if w2 == w3:
                        continue
                    for a in groups:
                        if a not in duals[w2]:
                            continue
                        for b in groups:
                            if a & b or b not in duals[w3]:
                                continue
                            key = ("E", w2, w3, a, b)
                            if key in br.ioa_done:
                                continue
                            if max(br.gen.get(w2, 0), br.gen.get(w3, 0)) > self.cfg.ioa_policy:
                                if "ioa-policy" not in br.bounds:
                                    br.bounds.append("ioa-policy")
                                continue
                            schema = self.index[("IOA-E", (("A", a), ("B", b)))]
                            lb = {"w1": c, "w2": w2, "w3": w3}
                            principal = (RelAtom(BOX, c, w2), RelAtom(BOX, c, w3))
                            out.append(((w2, w3), 4, schema, lb, principal, key))
        return out

    # ---- main loop for one branch
    def run(self, br: Branch):
        """Saturate ``br``; returns ('closed', steps, None), ('branch', steps, (schema, lb, fb, principal, children))
        or ('open', steps, None)."""
        while True:
            if br.closed is not None:
                schema, lb, fb, principal = br.closed
                self.spend()
                br.steps.append((schema, lb, fb, principal, ()))
                return "closed", None
            if br.queue and br.queue[0][0] >= CAT_AND:
                # goal-directed (IOA)/(IOA-E) instances go before splitting
                urgent = self.urgent_candidates(br)
                if urgent and self.label_budget(br, 1):
                    urgent.sort(key=lambda c: (max(c[0]), c[1], c[0]))
                    self._fire(br, urgent[0])
                    continue
            if br.queue:
                cat, _, cand = heapq.heappop(br.queue)
                schema, lb, fb, principal, delta = cand
                if not self.valid_now(br, schema, lb, principal, delta):
                    continue
                if schema.name in UNIVERSAL.values():
                    if self.witness(br, _tag_of(principal[0].formula), lb["w"], fb["phi"]):
                        continue
                    if lb["w"] in br.witnessed:
                        # chains of box-like rules wait for the creating phase, oldest label first
                        br.deferred.append(cand)
                    elif self.label_budget(br, 1):
                        self._universal(br, cand)
                    continue
                if schema.kind != "logical" and self.redundant(br, schema, lb, fb, principal, delta):
                    continue
                if schema.kind == "logical" and schema.retains_principal and self.redundant(br, schema, lb, fb, principal, delta):
                    continue
                if len(schema.premises) > 1:
                    return "branch", (schema, lb, fb, principal, delta)
                self.apply(br, schema, lb, fb, principal, delta)
                continue
            cands = self.creating_candidates(br)
            live = []
            for cand in br.deferred:
                schema, lb, fb, principal, delta = cand
                if self.valid_now(br, schema, lb, principal, delta) and \
                        not self.witness(br, _tag_of(principal[0].formula), lb["w"], fb["phi"]):
                    live.append(cand)
                    cands.append(((lb["w"],), -1, schema, lb, principal, cand))
            br.deferred = live
            if not cands:
                return "open", None
            cands.sort(key=lambda c: (c[1] >= 5, max(c[0]), c[1], c[0]))
            if self.cfg.seed:
                head = lambda c: (c[1] >= 5, max(c[0]), c[1])  # noqa: E731
                top = [c for c in cands if head(c) == head(cands[0])]
                pick = top[self.rng.randrange(len(top))]
            else:
                pick = cands[0]
            _, _, schema, lb, principal, *extra = pick
            if not self.label_budget(br, len(schema.eigenvariables)):
                # drop creating rules entirely once the budget is exhausted
                return "open", None
            if pick[1] == -1:
                br.deferred.remove(extra[0])
                self._universal(br, extra[0])
                continue
            self._fire(br, pick)

    def _universal(self, br: Branch, cand):
        schema, lb, fb, principal, _ = cand
        lb = dict(lb)
        lb["v"] = self.fresh(br, 1)[0]
        br.witnessed.add(lb["v"])
        self.apply(br, schema, lb, fb, principal, gen=br.gen.get(lb["w"], 0))

    def _fire(self, br: Branch, pick):
        _, _, schema, lb, principal, *extra = pick
        lb = dict(lb)
        fresh = self.fresh(br, len(schema.eigenvariables))
        lb.update(zip(sorted(schema.eigenvariables), fresh))
        base_gen = max((br.gen.get(x, 0) for x in principal_labels(principal, lb)), default=0)
        gen = base_gen + 1 if schema.name in ("IOA", "IOA-E") else base_gen
        if schema.name in ("IOA", "IOA-E"):
            br.ioa_done.add(extra[0])
        self.apply(br, schema, lb, {}, principal, gen=gen)
        if schema.name == "IOA-E":
            p = schema.param_dict
            br.obligations.append(SystemObligation(p["A"], p["B"], (lb["w1"], lb["w2"], lb["w3"], lb["w4"])))

    def search(self, br: Branch):
        """Returns (node, open_branch). ``node`` is a raw proof node when the branch closes."""
        status, info = self.run(br)
        if status == "closed":
            return _chain(br.steps, []), None
        if status == "open":
            return None, br
        schema, lb, fb, principal, delta = info
        self.spend()
        children = []
        for prem in self._built(schema, lb, fb, principal, delta):
            child = br.copy()
            rest = Counter(prem)
            for it in principal:
                if rest[it] > 0:
                    rest[it] -= 1
                else:
                    child.remove_item(it)
            for it in prem:
                if rest[it] > 0:
                    rest[it] -= 1
                    child.add_item(it, 0)
            node, open_br = self.search(child)
            if node is None:
                return None, open_br
            children.append(node)
        br.steps.append((schema, dict(lb), dict(fb), principal, delta))
        return _chain(br.steps, children), None


def tag_of_item(item):
    if isinstance(item, RelAtom):
        return item.tag
    if isinstance(item, Equality):
        return EQ_TAG
    return None


def principal_labels(principal, lb):
    out = set(lb.values())
    for it in principal:
        out.update(it.labels())
    return out


def _bind(pat, item, lb):
    if isinstance(pat, PRel):
        if not isinstance(item, RelAtom) or item.tag != pat.tag:
            return None
        pairs = ((pat.src, item.src), (pat.dst, item.dst))
    elif isinstance(pat, PEq):
        if not isinstance(item, Equality):
            return None
        pairs = ((pat.left, item.left), (pat.right, item.right))
    else:
        return None
    out = dict(lb)
    for var, val in pairs:
        if out.setdefault(var, val) != val:
            return None
    return out


def _ikey(item):
    from .sequent import item_key

    return item_key(item)


def _groups(agents):
    from .semantics import all_groups

    return all_groups(agents)


# ------------------------------------------------------------ raw proofs


@dataclass
class _Raw:
    schema: RuleSchema
    labels: dict
    formulas: dict
    principal: tuple
    delta: tuple
    children: list


def _chain(steps: list, children: list) -> _Raw:
    """Fold a list of unary steps (last one possibly branching) into nested nodes."""
    node = None
    for k in range(len(steps) - 1, -1, -1):
        schema, lb, fb, principal, delta = steps[k]
        kids = children if k == len(steps) - 1 else [node]
        node = _Raw(schema, lb, fb, principal, delta, kids)
    return node


def _added(node: _Raw, engine: _Engine) -> list:
    out = []
    for prem in engine._built(node.schema, node.labels, node.formulas, node.principal, node.delta):
        extra = Counter(prem)
        extra.subtract(Counter(node.principal))
        out.append({it for it, n in extra.items() if n > 0})
    return out


def _additive(node: _Raw, engine: _Engine) -> bool:
    if node.schema.kind == "initial":
        return False
    if node.schema.name == "IOA-E":
        return False
    for prem in engine._built(node.schema, node.labels, node.formulas, node.principal, node.delta):
        need = Counter(node.principal)
        need.subtract(Counter(prem))
        if any(n > 0 for n in need.values()):
            return False
    return True


def prune(root: _Raw, engine: _Engine) -> _Raw:
    """Drop additive steps none of whose added items is used above them."""
    # post-order: used items per subtree
    used: dict = {}
    order, stack = [], [root]
    while stack:
        n = stack.pop()
        order.append(n)
        stack.extend(n.children)
    for n in reversed(order):
        u = set(n.principal) | set(n.delta)
        for c in n.children:
            u |= used[id(c)]
        used[id(n)] = u

    def rebuild(n: _Raw) -> _Raw:
        while True:
            if _additive(n, engine):
                added = _added(n, engine)
                drop = None
                for k, c in enumerate(n.children):
                    if not (added[k] & used[id(c)]):
                        drop = k
                        break
                if drop is not None:
                    n = n.children[drop]
                    continue
            break
        return _Raw(n.schema, n.labels, n.formulas, n.principal, n.delta, [rebuild(c) for c in n.children])

    return rebuild(root)


def materialize(root_seq: Sequent, raw: _Raw) -> ProofTree:
    top = ProofTree(root_seq, raw.schema.name, raw.schema.params, raw.labels, raw.formulas, raw.principal, raw.delta)
    stack = [(top, raw)]
    while stack:
        node, r = stack.pop()
        prems = premise_sequents(node.sequent, r.schema, r.labels, r.formulas, r.principal, r.delta)
        for prem, c in zip(prems, r.children):
            child = ProofTree(prem, c.schema.name, c.schema.params, c.labels, c.formulas, c.principal, c.delta)
            node.children.append(child)
            stack.append((child, c))
    return top


# ----------------------------------------------------------------- driver


def _initial_branch(engine: _Engine, s: Sequent) -> Branch:
    br = Branch(engine)
    for item in s.items:
        br.add_item(item, 0)
    return br


def _search_once(s: Sequent, cfg: SearchConfig, allow_ioax: bool, fuel_left: int):
    engine = _Engine(s.logic, s.agents, SearchConfig(fuel_left, cfg.max_labels, cfg.ioa_policy, cfg.seed), allow_ioax)
    br = _initial_branch(engine, s)
    try:
        raw, open_br = engine.search(br)
    except _FuelOut:
        return engine, None, None, True
    return engine, raw, open_br, False


def prove(s: Sequent, cfg: SearchConfig | None = None) -> SearchOutcome:
    """Search for a derivation of ``s``; on failure try to extract a countermodel."""
    from .countermodel import BranchSnapshot, CountermodelError, extract, verify

    cfg = cfg or SearchConfig()
    s.check_tier()
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20000))
    try:
        engine, raw, open_br, out_of_fuel = _search_once(s, cfg, True, cfg.fuel)
        used = engine.used
        notes = []
        if raw is not None:
            tree = materialize(s, prune(raw, engine))
            if not check_discipline(tree):
                notes.append("proof used one (IOA-U) rule without its partner; retried without (IOA_X)")
                engine2, raw2, open2, oof2 = _search_once(s, cfg, False, max(1, cfg.fuel - used))
                used += engine2.used
                if raw2 is None:
                    return Unknown("no proof respecting the (IOA_X) discipline", _stats(used, notes), None)
                tree = materialize(s, prune(raw2, engine2))
                engine = engine2
            res = check_proof(tree, engine.table)
            if not res:
                raise AssertionError(f"prover produced an invalid proof: {res.diagnostic}")
            return Derivable(tree, _stats(used, notes) | {"height": tree.height(), "size": tree.size()})
        if out_of_fuel:
            return Unknown("fuel exhausted", _stats(used, notes), None)
        branch_seq = open_br.current(s)
        if open_br.bounds:
            return Unknown("branch ended by " + " and ".join(open_br.bounds), _stats(used, notes), branch_seq)
        snapshot = BranchSnapshot(
            items=tuple(sorted(open_br.history, key=_ikey)),
            root=s,
            logic=s.logic,
            agents=s.agents,
            certificate={"saturated": True, "labels": len(open_br.labels), "fuel_used": used,
                         "seriality": "on demand"},
        )
        try:
            result = extract(snapshot)
        except CountermodelError as exc:
            return Unknown(f"countermodel extraction failed: {exc}", _stats(used, notes), branch_seq)
        if not verify(result, s):
            return Unknown("extracted model failed verification", _stats(used, notes), branch_seq)
        return Refuted(branch_seq, snapshot, result, _stats(used, notes))
    finally:
        sys.setrecursionlimit(old)


def _stats(used, notes) -> dict:
    return {"fuel_used": used, "notes": list(notes)}


def prove_formula(f, logic: str = "ldm", agents: int = 2, cfg: SearchConfig | None = None) -> SearchOutcome:
    return prove(Sequent((Labelled(0, f),), logic, agents), cfg)


def admissibility_suite(corpus, cfg: SearchConfig | None = None, seed: int = 0, id_formulas: int = 0):
    """Structural-property checks over a corpus of derivable sequents; see :mod:`g3stit.admissibility`."""
    from .admissibility import admissibility_suite as run

    return run(corpus, cfg, seed=seed, id_formulas=id_formulas)


def certificate(outcome: SearchOutcome) -> dict:
    """JSON form of an outcome; equal outcomes give equal certificates."""
    from .proof import proof_to_json

    out = {"verdict": outcome.verdict, "stats": dict(outcome.stats)}
    if isinstance(outcome, Derivable):
        out["proof"] = proof_to_json(outcome.proof)
    elif isinstance(outcome, Refuted):
        out["branch"] = outcome.branch.text()
        out["saturation"] = dict(outcome.snapshot.certificate)
        out["countermodel"] = outcome.extraction.to_json()
    else:
        out["reason"] = outcome.reason
        out["branch"] = outcome.branch.text() if outcome.branch is not None else None
    return out


def prove_many(sequents, cfg: SearchConfig | None = None, workers: int = 1) -> list:
    """Prove independent sequents, optionally on a thread pool; results keep input order."""
    sequents = list(sequents)
    if workers <= 1:
        return [prove(s, cfg) for s in sequents]
    import threading
    from concurrent.futures import ThreadPoolExecutor

    # deep branches recurse; worker threads get a main-thread-sized stack
    old = threading.stack_size(64 * 1024 * 1024)
    try:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda s: prove(s, cfg), sequents))
    finally:
        threading.stack_size(old)
