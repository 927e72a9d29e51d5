"""One-sided labelled sequents: relational atoms, equalities and labelled formulas.

A sequent is read as "if every relational atom and equality holds, then some
labelled formula holds". Items form a multiset; order is kept only so output
is deterministic.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Union

from .formula import Formula, FormulaError, LOGICS, canonical_group, group_text, parse, render
from .unionfind import UnionFind

BOX = "R[]"
AG = "RAg"
RG = "RG"
RG_COMP = "RGc"
RH = "RH"
RX = "RX"


def agent_tag(i: int) -> str:
    return f"R{i}"


def group_tag(group) -> str:
    return "R" + group_text(frozenset(group))


def tag_agent(tag: str) -> int | None:
    if tag[1:].isdigit():
        return int(tag[1:])
    return None


def tag_group(tag: str) -> frozenset | None:
    if tag.startswith("R{"):
        inner = tag[2:-1]
        return canonical_group(m for m in inner.split(",") if m)
    return None


def tags_for(logic: str, agents: int) -> list[str]:
    """All relation tags of a tier, in a fixed order."""
    from itertools import combinations

    if logic == "ldm":
        return [BOX] + [agent_tag(i) for i in range(1, agents + 1)]
    if logic == "tstit":
        return [BOX] + [agent_tag(i) for i in range(1, agents + 1)] + [AG, RG, RG_COMP, RH]
    if logic == "xstit":
        groups = [frozenset(c) for k in range(agents + 1) for c in combinations(range(1, agents + 1), k)]
        return [BOX, RX] + [group_tag(g) for g in groups]
    raise ValueError(f"unknown logic {logic!r}")


def tag_fits(tag: str, logic: str, agents: int) -> bool:
    if tag == BOX:
        return True
    i = tag_agent(tag)
    if i is not None:
        return logic in ("ldm", "tstit") and 1 <= i <= agents
    g = tag_group(tag)
    if g is not None:
        return logic == "xstit" and all(1 <= m <= agents for m in g)
    if tag in (AG, RG, RG_COMP, RH):
        return logic == "tstit"
    if tag == RX:
        return logic == "xstit"
    return False


def label_text(x: int) -> str:
    return f"w{x}"


@dataclass(frozen=True, slots=True)
class RelAtom:
    tag: str
    src: int
    dst: int

    def labels(self):
        return (self.src, self.dst)

    def text(self) -> str:
        return f"{self.tag}:{label_text(self.src)},{label_text(self.dst)}"


@dataclass(frozen=True, slots=True)
class Equality:
    left: int
    right: int

    def labels(self):
        return (self.left, self.right)

    def text(self) -> str:
        return f"{label_text(self.left)} = {label_text(self.right)}"


@dataclass(frozen=True, slots=True)
class Labelled:
    label: int
    formula: Formula

    def labels(self):
        return (self.label,)

    def text(self) -> str:
        return f"{label_text(self.label)}: {render(self.formula)}"


SequentItem = Union[RelAtom, Equality, Labelled]


def item_key(item: SequentItem):
    if isinstance(item, RelAtom):
        return (0, item.tag, item.src, item.dst)
    if isinstance(item, Equality):
        return (1, "", item.left, item.right)
    return (2, render(item.formula), item.label, 0)


def rename_item(item: SequentItem, mapping: dict[int, int]) -> SequentItem:
    if isinstance(item, RelAtom):
        return RelAtom(item.tag, mapping.get(item.src, item.src), mapping.get(item.dst, item.dst))
    if isinstance(item, Equality):
        return Equality(mapping.get(item.left, item.left), mapping.get(item.right, item.right))
    return Labelled(mapping.get(item.label, item.label), item.formula)


class SequentError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Sequent:
    """A multiset of sequent items over one logic tier and agent count."""

    items: tuple
    logic: str = "ldm"
    agents: int = 2

    def __post_init__(self):
        if self.logic not in LOGICS:
            raise SequentError(f"unknown logic {self.logic!r}")
        object.__setattr__(self, "items", tuple(self.items))

    @cached_property
    def counts(self) -> Counter:
        return Counter(self.items)

    def __eq__(self, other):
        if not isinstance(other, Sequent):
            return NotImplemented
        return (self.logic, self.agents) == (other.logic, other.agents) and self.counts == other.counts

    def __hash__(self):
        return hash((self.logic, self.agents, frozenset(self.counts.items())))

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __contains__(self, item):
        return item in self.counts

    @cached_property
    def labels(self) -> frozenset:
        return frozenset(x for item in self.items for x in item.labels())

    @property
    def relational(self) -> list:
        return [it for it in self.items if isinstance(it, RelAtom)]

    @property
    def equalities(self) -> list:
        return [it for it in self.items if isinstance(it, Equality)]

    @property
    def formulas(self) -> list:
        return [it for it in self.items if isinstance(it, Labelled)]

    @cached_property
    def classes(self) -> UnionFind:
        """Equality classes of labels, mirrored from the equality items."""
        uf = UnionFind()
        for eq in self.equalities:
            uf.union(eq.left, eq.right)
        return uf

    def with_items(self, items: Iterable[SequentItem]) -> "Sequent":
        return Sequent(tuple(items), self.logic, self.agents)

    def add(self, *items: SequentItem) -> "Sequent":
        return self.with_items(self.items + tuple(items))

    def remove(self, *items: SequentItem) -> "Sequent":
        rest = list(self.items)
        for item in items:
            try:
                rest.remove(item)
            except ValueError:
                raise SequentError(f"item {item.text()} not in sequent") from None
        return self.with_items(rest)

    def sorted(self) -> "Sequent":
        return self.with_items(sorted(self.items, key=item_key))

    def check_tier(self):
        from .formula import fits_logic

        if self.agents < 1:
            raise SequentError("agent count must be at least 1")
        for item in self.items:
            if isinstance(item, RelAtom) and not tag_fits(item.tag, self.logic, self.agents):
                raise SequentError(f"relation {item.tag} does not belong to {self.logic}")
            if isinstance(item, Equality) and self.logic == "ldm":
                raise SequentError("equality atoms are not part of G3Ldm sequents")
            if isinstance(item, Labelled) and not fits_logic(item.formula, self.logic):
                raise SequentError(f"formula {render(item.formula)} is outside {self.logic}")

    def text(self) -> str:
        return " ; ".join(item.text() for item in self.items)

    def __str__(self):
        return self.text()


def singleton(f: Formula, logic: str = "ldm", agents: int = 2, label: int = 0) -> Sequent:
    return Sequent((Labelled(label, f),), logic, agents)


def substitute(s: Sequent, old: int, new: int) -> Sequent:
    """Replace every occurrence of label ``old`` by ``new``; duplicates are kept."""
    if old == new:
        return s
    mapping = {old: new}
    return s.with_items(rename_item(item, mapping) for item in s.items)


def satisfies(model, interpretation: dict, s: Sequent) -> bool:
    """Whether ``s`` is satisfied in ``model`` under ``interpretation`` (label -> world)."""
    from .semantics import SemanticsError, model_check

    if model.tier != s.logic:
        raise SemanticsError(f"model tier {model.tier} does not match sequent logic {s.logic}")
    for x in s.labels:
        if x not in interpretation:
            raise SemanticsError(f"label {label_text(x)} is not interpreted")
    for item in s.items:
        if isinstance(item, RelAtom):
            if not model.holds(item.tag, interpretation[item.src], interpretation[item.dst]):
                return True
        elif isinstance(item, Equality):
            if interpretation[item.left] != interpretation[item.right]:
                return True
    return any(model_check(model, interpretation[it.label], it.formula) for it in s.formulas)


# ------------------------------------------------------------------ parsing

_LABEL_RE = re.compile(r"\s*w(\d+)\s*$")
_REL_RE = re.compile(r"\s*(R\[\]|R\d+|RAg|RGc|RG|RH|RX|R\{[0-9,\s]*\})\s*:\s*w(\d+)\s*,\s*w(\d+)\s*$")
_EQ_RE = re.compile(r"\s*w(\d+)\s*=\s*w(\d+)\s*$")
_LAB_RE = re.compile(r"\s*w(\d+)\s*:(.*)$", re.S)


def parse_item(text: str, logic: str, agents: int) -> SequentItem:
    m = _REL_RE.match(text)
    if m:
        tag = m.group(1)
        if tag.startswith("R{"):
            tag = group_tag(canonical_group(x for x in tag[2:-1].replace(" ", "").split(",") if x))
        if not tag_fits(tag, logic, agents):
            raise SequentError(f"relation {tag} does not belong to {logic} with {agents} agents")
        return RelAtom(tag, int(m.group(2)), int(m.group(3)))
    m = _EQ_RE.match(text)
    if m:
        return Equality(int(m.group(1)), int(m.group(2)))
    m = _LAB_RE.match(text)
    if m:
        return Labelled(int(m.group(1)), parse(m.group(2), logic, agents))
    raise SequentError(f"cannot read sequent item {text.strip()!r}")


def parse_sequent(text: str, logic: str = "ldm", agents: int = 2) -> Sequent:
    """Read the ``;``-separated text form. A bare formula is taken as ``w0: formula``."""
    parts = [p for p in text.split(";") if p.strip()]
    if len(parts) == 1 and not (_REL_RE.match(parts[0]) or _EQ_RE.match(parts[0]) or _LAB_RE.match(parts[0])):
        return singleton(parse(parts[0], logic, agents), logic, agents)
    try:
        items = tuple(parse_item(p, logic, agents) for p in parts)
    except FormulaError as exc:
        raise SequentError(str(exc)) from exc
    s = Sequent(items, logic, agents)
    s.check_tier()
    return s
