"""Seeded random formulas and sequents for property tests and corpora."""

from __future__ import annotations

import random

from . import formula as fm
from .semantics import all_groups
from .sequent import Labelled, RelAtom, Sequent, tags_for

_UNARY = {
    "ldm": ["box", "dia", "stit", "stitd"],
    "tstit": ["box", "dia", "stit", "stitd", "ag", "agd", "G", "F", "H", "P"],
    "xstit": ["box", "dia", "xstit", "xstitd", "next", "nextd"],
}


def random_formula(rng: random.Random, logic: str, agents: int = 2, depth: int = 2, atoms=("p", "q")) -> fm.Formula:
    """A random NNF formula with at most ``depth`` nested operators."""
    if depth == 0 or rng.random() < 0.25:
        a = rng.choice(atoms)
        return fm.PosAtom(a) if rng.random() < 0.5 else fm.NegAtom(a)
    if rng.random() < 0.35:
        left = random_formula(rng, logic, agents, depth - 1, atoms)
        right = random_formula(rng, logic, agents, depth - 1, atoms)
        return fm.And(left, right) if rng.random() < 0.5 else fm.Or(left, right)
    op = rng.choice(_UNARY[logic])
    body = random_formula(rng, logic, agents, depth - 1, atoms)
    if op == "stit":
        return fm.Stit(rng.randint(1, agents), body)
    if op == "stitd":
        return fm.StitDual(rng.randint(1, agents), body)
    if op == "xstit":
        return fm.XStit(rng.choice(all_groups(agents)), body)
    if op == "xstitd":
        return fm.XStitDual(rng.choice(all_groups(agents)), body)
    ctor = {"box": fm.Box, "dia": fm.Diamond, "ag": fm.AgStit, "agd": fm.AgStitDual, "G": fm.G, "F": fm.F,
            "H": fm.H, "P": fm.P, "next": fm.Next, "nextd": fm.NextDual}[op]
    return ctor(body)


def random_sequent(rng: random.Random, logic: str, agents: int = 2, depth: int = 2, max_labels: int = 3,
                   atoms=("p", "q"), max_formulas: int = 3, max_relations: int = 2) -> Sequent:
    """A random sequent over labels w0..w(k-1), k <= ``max_labels``."""
    k = rng.randint(1, max_labels)
    tags = [t for t in tags_for(logic, agents) if t != "RGc"]
    items = []
    for _ in range(rng.randint(0, max_relations if k > 1 else 0)):
        items.append(RelAtom(rng.choice(tags), rng.randrange(k), rng.randrange(k)))
    for _ in range(rng.randint(1, max_formulas)):
        items.append(Labelled(rng.randrange(k), random_formula(rng, logic, agents, depth, atoms)))
    return Sequent(tuple(items), logic, agents)


def random_theorem_candidate(rng: random.Random, logic: str, agents: int = 2, depth: int = 2) -> Sequent:
    """A sequent biased towards validity: a formula next to a weakened form of its negation."""
    f = random_formula(rng, logic, agents, depth)
    g = random_formula(rng, logic, agents, max(depth - 1, 0))
    items = [Labelled(0, f), Labelled(0, fm.Or(fm.negate(f), g) if rng.random() < 0.5 else fm.negate(f))]
    return Sequent(tuple(items), logic, agents)
