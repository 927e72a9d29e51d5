import random

import pytest
from hypothesis import given, settings, strategies as st

from g3stit import formula as fm
from g3stit.generate import random_sequent
from g3stit.semantics import RelationalModel, enumerate_models
from g3stit.sequent import (
    BOX, Equality, Labelled, RelAtom, Sequent, SequentError, group_tag, parse_sequent, satisfies, substitute,
)

p = fm.PosAtom("p")


def test_text_form_round_trip():
    text = "R[]:w0,w1 ; R1:w0,w2 ; w0 = w1 ; w2: p & q"
    s = parse_sequent(text, "tstit", 2)
    assert s.items[0] == RelAtom(BOX, 0, 1)
    assert s.items[2] == Equality(0, 1)
    assert s.text() == text
    x = parse_sequent("R{1,2}:w0,w1 ; RX:w1,w1", "xstit", 2)
    assert x.items[0] == RelAtom(group_tag({1, 2}), 0, 1)


def test_tier_mismatch_rejected():
    with pytest.raises(SequentError):
        parse_sequent("RG:w0,w1", "ldm", 2)
    with pytest.raises(SequentError):
        parse_sequent("w0 = w1", "ldm", 2)


def test_substitute_examples():
    s = Sequent((RelAtom(BOX, 0, 1), Labelled(0, p)))
    assert substitute(s, 0, 2) == Sequent((RelAtom(BOX, 2, 1), Labelled(2, p)))
    dup = substitute(Sequent((RelAtom(BOX, 0, 1), RelAtom(BOX, 2, 1))), 2, 0)
    assert dup.items == (RelAtom(BOX, 0, 1), RelAtom(BOX, 0, 1))


def test_multiset_equality():
    a = Sequent((Labelled(0, p), Labelled(0, p)))
    assert a != Sequent((Labelled(0, p),))
    assert a == Sequent((Labelled(0, p), Labelled(0, p)))
    assert Sequent((RelAtom(BOX, 0, 1), Labelled(0, p))) == Sequent((Labelled(0, p), RelAtom(BOX, 0, 1)))


def test_equality_classes():
    s = parse_sequent("w0 = w1 ; w1 = w2 ; w3: p", "tstit", 1)
    assert s.classes.same(0, 2)
    assert not s.classes.same(0, 3)


def _two_worlds():
    return RelationalModel("ldm", 1, ("a", "b"), {BOX: {("a", "a"), ("b", "b")}, "R1": {("a", "a"), ("b", "b")}},
                           {"p": {"a"}})


def test_satisfies_examples():
    m = _two_worlds()
    assert not satisfies(m, {}, Sequent(()))
    assert satisfies(m, {0: "b"}, Sequent((Labelled(0, p), Labelled(0, fm.NegAtom("p")))))
    # R[] a b fails, so the sequent holds vacuously
    assert satisfies(m, {0: "a", 1: "b"}, Sequent((RelAtom(BOX, 0, 1), Labelled(1, p)), "ldm", 1))
    assert not satisfies(m, {0: "b"}, Sequent((Labelled(0, p),), "ldm", 1))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_adding_a_true_relational_atom_changes_nothing(seed):
    rng = random.Random(seed)
    s = random_sequent(rng, "ldm", 1, 1, 2)
    models = list(enumerate_models("ldm", 1, 2, ("p", "q")))
    m = rng.choice(models)
    labels = sorted(s.labels)
    interp = {x: rng.choice(m.worlds) for x in labels}
    a, b = rng.choice(labels), rng.choice(labels)
    for tag in (BOX, "R1"):
        if m.holds(tag, interp[a], interp[b]):
            assert satisfies(m, interp, s) == satisfies(m, interp, s.add(RelAtom(tag, a, b)))
