"""Formulas of the STIT languages in negation normal form.

Three object languages share one syntax tree:

* ``ldm``   -- atoms, ``&``, ``|``, box/diamond and the individual stit ``[i]``/``<i>``
* ``tstit`` -- ``ldm`` plus ``[Ag]``/``<Ag>`` and the tenses ``G F H P``
* ``xstit`` -- atoms, ``&``, ``|``, box/diamond, group stit ``[A]x``/``<A>x`` and ``[X]``/``<X>``

Negation is not a constructor. ``~`` may only precede an atom; ``neg(...)``
in the concrete syntax is expanded by :func:`negate`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

LOGICS = ("ldm", "tstit", "xstit")

# reserved atom used to spell T and _|_
TOP_ATOM = "p0"


class FormulaError(ValueError):
    """Raised for malformed formula text or tier violations."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


def canonical_group(members) -> frozenset:
    return frozenset(int(m) for m in members)


def group_text(group: frozenset) -> str:
    return "{" + ",".join(str(m) for m in sorted(group)) + "}"


@dataclass(frozen=True, slots=True)
class PosAtom:
    name: str


@dataclass(frozen=True, slots=True)
class NegAtom:
    name: str


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Box:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Diamond:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Stit:
    agent: int
    body: "Formula"


@dataclass(frozen=True, slots=True)
class StitDual:
    agent: int
    body: "Formula"


@dataclass(frozen=True, slots=True)
class AgStit:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class AgStitDual:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class G:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class F:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class H:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class P:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class XStit:
    group: frozenset
    body: "Formula"


@dataclass(frozen=True, slots=True)
class XStitDual:
    group: frozenset
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Next:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class NextDual:
    body: "Formula"


Formula = Union[
    PosAtom, NegAtom, And, Or, Box, Diamond, Stit, StitDual, AgStit, AgStitDual,
    G, F, H, P, XStit, XStitDual, Next, NextDual,
]

# operator -> dual, for the unary operators without an index
_SIMPLE_DUALS = {
    Box: Diamond, Diamond: Box,
    AgStit: AgStitDual, AgStitDual: AgStit,
    G: F, F: G, H: P, P: H,
    Next: NextDual, NextDual: Next,
}

_TIER_OF = {
    PosAtom: "base", NegAtom: "base", And: "base", Or: "base", Box: "base", Diamond: "base",
    Stit: "ldm", StitDual: "ldm",
    AgStit: "tstit", AgStitDual: "tstit", G: "tstit", F: "tstit", H: "tstit", P: "tstit",
    XStit: "xstit", XStitDual: "xstit", Next: "xstit", NextDual: "xstit",
}

_ALLOWED = {
    "ldm": {"base", "ldm"},
    "tstit": {"base", "ldm", "tstit"},
    "xstit": {"base", "xstit"},
}


def negate(f: Formula) -> Formula:
    """Return the NNF negation of ``f`` (dualise every operator, flip atoms)."""
    kind = type(f)
    if kind is PosAtom:
        return NegAtom(f.name)
    if kind is NegAtom:
        return PosAtom(f.name)
    if kind is And:
        return Or(negate(f.left), negate(f.right))
    if kind is Or:
        return And(negate(f.left), negate(f.right))
    if kind is Stit:
        return StitDual(f.agent, negate(f.body))
    if kind is StitDual:
        return Stit(f.agent, negate(f.body))
    if kind is XStit:
        return XStitDual(f.group, negate(f.body))
    if kind is XStitDual:
        return XStit(f.group, negate(f.body))
    return _SIMPLE_DUALS[kind](negate(f.body))


def implies(a: Formula, b: Formula) -> Formula:
    return Or(negate(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return And(implies(a, b), implies(b, a))


def conj(*fs: Formula) -> Formula:
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(*fs: Formula) -> Formula:
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


TOP = Or(PosAtom(TOP_ATOM), NegAtom(TOP_ATOM))
BOTTOM = And(PosAtom(TOP_ATOM), NegAtom(TOP_ATOM))


def children(f: Formula) -> tuple:
    if isinstance(f, (PosAtom, NegAtom)):
        return ()
    if isinstance(f, (And, Or)):
        return (f.left, f.right)
    return (f.body,)


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from subformulas(c)


def atoms(f: Formula) -> set[str]:
    return {g.name for g in subformulas(f) if isinstance(g, (PosAtom, NegAtom))}


def depth(f: Formula) -> int:
    """Modal depth: nesting of modal/temporal operators."""
    if isinstance(f, (PosAtom, NegAtom)):
        return 0
    if isinstance(f, (And, Or)):
        return max(depth(f.left), depth(f.right))
    return 1 + depth(f.body)


def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in children(f))


def fits_logic(f: Formula, logic: str) -> bool:
    allowed = _ALLOWED[logic]
    return all(_TIER_OF[type(g)] in allowed for g in subformulas(f))


def minimal_logic(f: Formula) -> str:
    """Smallest language containing ``f`` (``ldm`` when it only uses the shared core)."""
    tiers = {_TIER_OF[type(g)] for g in subformulas(f)}
    if "xstit" in tiers and "tstit" in tiers:
        raise FormulaError("formula mixes Tstit-only and Xstit-only operators")
    if "xstit" in tiers:
        return "xstit"
    if "tstit" in tiers:
        return "tstit"
    return "ldm"


def agents_used(f: Formula) -> set[int]:
    out: set[int] = set()
    for g in subformulas(f):
        if isinstance(g, (Stit, StitDual)):
            out.add(g.agent)
        elif isinstance(g, (XStit, XStitDual)):
            out |= set(g.group)
    return out


# ---------------------------------------------------------------- rendering

_PREFIX_TEXT = {
    Box: "[]", Diamond: "<>", AgStit: "[Ag]", AgStitDual: "<Ag>",
    G: "G ", F: "F ", H: "H ", P: "P ", Next: "[X]", NextDual: "<X>",
}


def _prefix(f: Formula) -> str:
    kind = type(f)
    if kind is Stit:
        return f"[{f.agent}]"
    if kind is StitDual:
        return f"<{f.agent}>"
    if kind is XStit:
        return f"[{group_text(f.group)}]x "
    if kind is XStitDual:
        return f"<{group_text(f.group)}>x "
    return _PREFIX_TEXT[kind]


def render(f: Formula) -> str:
    """Concrete ASCII syntax with minimal parentheses; ``parse(render(f)) == f``."""
    kind = type(f)
    if kind is PosAtom:
        return f.name
    if kind is NegAtom:
        return "~" + f.name
    if kind is Or:
        right = render(f.right)
        if isinstance(f.right, Or):
            right = f"({right})"
        return f"{render(f.left)} | {right}"
    if kind is And:
        left, right = render(f.left), render(f.right)
        if isinstance(f.left, Or):
            left = f"({left})"
        if isinstance(f.right, (And, Or)):
            right = f"({right})"
        return f"{left} & {right}"
    body = render(f.body)
    if isinstance(f.body, (And, Or)):
        body = f"({body})"
    return _prefix(f) + body


# ------------------------------------------------------------------ parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<groupop>\[\{[0-9,\s]*\}\]x|<\{[0-9,\s]*\}>x)
  | (?P<stitd>\[\d+\]d|<\d+>d)
  | (?P<agentop>\[\d+\]|<\d+>)
  | (?P<boxop>\[\]|<>)
  | (?P<agop>\[Ag\]|<Ag>)
  | (?P<nextop>\[X\]|<X>)
  | (?P<iff><->)
  | (?P<imp>->)
  | (?P<bot>_\|_)
  | (?P<and>&)
  | (?P<or>\|)
  | (?P<tilde>~)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

_TENSES = {"G": G, "F": F, "H": H, "P": P}


def tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, logic: str, agents: int):
        if logic not in LOGICS:
            raise FormulaError(f"unknown logic {logic!r}")
        if agents < 1:
            raise FormulaError("agent count must be at least 1")
        self.tokens = tokenize(text)
        self.i = 0
        self.logic = logic
        self.agents = agents

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise FormulaError(f"expected {kind}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def require(self, tier: str, pos: int, what: str):
        if tier not in _ALLOWED[self.logic]:
            raise FormulaError(f"{what} is not part of the {self.logic} language", pos)

    def agent(self, text: str, pos: int) -> int:
        i = int(text)
        if not 1 <= i <= self.agents:
            raise FormulaError(f"agent {i} out of range 1..{self.agents}", pos)
        return i

    def parse(self) -> Formula:
        f = self.iff()
        tok = self.peek()
        if tok[0] != "eof":
            raise FormulaError(f"unexpected {tok[1]!r}", tok[2])
        return f

    def iff(self):
        left = self.imp()
        while self.peek()[0] == "iff":
            self.take()
            left = iff(left, self.imp())
        return left

    def imp(self):
        left = self.disj()
        if self.peek()[0] == "imp":
            self.take()
            return implies(left, self.imp())
        return left

    def disj(self):
        left = self.conj()
        while self.peek()[0] == "or":
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.peek()[0] == "and":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self):
        kind, text, pos = self.take()
        if kind == "tilde":
            name_tok = self.take()
            if name_tok[0] != "ident" or not name_tok[1][0].islower():
                raise FormulaError("'~' may only negate an atom; use neg(...)", pos)
            return NegAtom(name_tok[1])
        if kind == "lpar":
            f = self.iff()
            self.take("rpar")
            return f
        if kind == "bot":
            return BOTTOM
        if kind == "boxop":
            body = self.unary()
            return Box(body) if text == "[]" else Diamond(body)
        if kind == "agentop":
            self.require("ldm", pos, "individual stit")
            i = self.agent(text[1:-1], pos)
            body = self.unary()
            return Stit(i, body) if text[0] == "[" else StitDual(i, body)
        if kind == "stitd":
            self.require("ldm", pos, "deliberative stit")
            i = self.agent(text[1:-2], pos)
            body = self.unary()
            dstit = And(Stit(i, body), Diamond(negate(body)))
            return dstit if text[0] == "[" else negate(dstit)
        if kind == "agop":
            self.require("tstit", pos, "[Ag]")
            body = self.unary()
            return AgStit(body) if text[0] == "[" else AgStitDual(body)
        if kind == "nextop":
            self.require("xstit", pos, "[X]")
            body = self.unary()
            return Next(body) if text[0] == "[" else NextDual(body)
        if kind == "groupop":
            self.require("xstit", pos, "group stit")
            inner = text[2:text.index("}")]
            members = [m for m in inner.replace(" ", "").split(",") if m]
            group = canonical_group(self.agent(m, pos) for m in members)
            body = self.unary()
            return XStit(group, body) if text[0] == "[" else XStitDual(group, body)
        if kind == "ident":
            if text in _TENSES:
                self.require("tstit", pos, f"tense operator {text}")
                return _TENSES[text](self.unary())
            if text == "T":
                return TOP
            if text == "neg" and self.peek()[0] == "lpar":
                self.take()
                f = self.iff()
                self.take("rpar")
                return negate(f)
            if not text[0].islower():
                raise FormulaError(f"unknown operator {text!r}", pos)
            return PosAtom(text)
        raise FormulaError(f"unexpected {text or 'end of input'!r}", pos)


def parse(text: str, logic: str = "ldm", agents: int = 2) -> Formula:
    """Parse concrete syntax into a formula of the given logic."""
    return _Parser(text, logic, agents).parse()
