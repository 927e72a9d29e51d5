import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from g3stit import axioms, formula as fm
from g3stit.generate import random_formula
from g3stit.semantics import (
    RelationalModel, SemanticsError, enumerate_frames, enumerate_models, falsification_trace, model_check,
    valid_on_models, validate_frame,
)
from g3stit.sequent import AG, BOX, RG, RH, RX, agent_tag, group_tag

p = fm.PosAtom("p")


def reference(m, w, f):
    """Truth by direct structural recursion over the semantic clauses."""
    def every(tag):
        return all(reference(m, u, f.body) for u in m.successors(tag, w))

    def some(tag):
        return any(reference(m, u, f.body) for u in m.successors(tag, w))

    table = {
        fm.Box: (BOX, every), fm.Diamond: (BOX, some), fm.AgStit: (AG, every), fm.AgStitDual: (AG, some),
        fm.G: (RG, every), fm.F: (RG, some), fm.H: (RH, every), fm.P: (RH, some),
        fm.Next: (RX, every), fm.NextDual: (RX, some),
    }
    if isinstance(f, fm.PosAtom):
        return w in m.valuation.get(f.name, ())
    if isinstance(f, fm.NegAtom):
        return w not in m.valuation.get(f.name, ())
    if isinstance(f, fm.And):
        return reference(m, w, f.left) and reference(m, w, f.right)
    if isinstance(f, fm.Or):
        return reference(m, w, f.left) or reference(m, w, f.right)
    if isinstance(f, (fm.Stit, fm.StitDual)):
        return (every if isinstance(f, fm.Stit) else some)(agent_tag(f.agent))
    if isinstance(f, (fm.XStit, fm.XStitDual)):
        return (every if isinstance(f, fm.XStit) else some)(group_tag(f.group))
    tag, how = table[type(f)]
    return how(tag)


def one_world_tstit():
    return RelationalModel("tstit", 1, ("w",), {BOX: {("w", "w")}, "R1": {("w", "w")}, AG: {("w", "w")},
                                                RG: {("w", "w")}})


def test_model_check_example():
    m = RelationalModel("ldm", 1, ("w",), {BOX: {("w", "w")}, "R1": {("w", "w")}}, {"p": {"w"}})
    assert model_check(m, "w", fm.Box(p))


def test_unknown_world_rejected():
    with pytest.raises(SemanticsError):
        RelationalModel("ldm", 1, ("w",), {BOX: {("w", "v")}})


@pytest.mark.parametrize("tier", ["ldm", "xstit"])
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_model_check_agrees_with_reference(tier, seed):
    rng = random.Random(seed)
    f = random_formula(rng, tier, 2, 3)
    models = list(enumerate_models(tier, 2, 2, ("p", "q")))
    for m in rng.sample(models, 8):
        for w in m.worlds:
            assert model_check(m, w, f) == reference(m, w, f)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_tense_clauses_agree_with_reference(seed):
    rng = random.Random(seed)
    f = random_formula(rng, "tstit", 1, 3)
    # three moments in a line, frontier at the end
    W = ("a", "b", "c")
    ident = {(x, x) for x in W}
    m = RelationalModel("tstit", 1, W, {BOX: ident, "R1": ident, AG: ident,
                                        RG: {("a", "b"), ("b", "c"), ("a", "c")}},
                        {"p": {"b"}, "q": {"a", "c"}}, frontier={"c"})
    assert validate_frame(m).valid
    for w in W:
        assert model_check(m, w, f) == reference(m, w, f)


def test_validate_frame_examples():
    report = validate_frame(one_world_tstit())
    assert [(r.name, r.witness) for r in report.failures()] == [("C7", ("w", "w"))]
    assert "C7 violated at (w, w)" in report.lines()
    x = RelationalModel("xstit", 2, ("w",), {t: {("w", "w")} for t in
                                             (BOX, RX, group_tag(()), group_tag({1}), group_tag({2}),
                                              group_tag({1, 2}))})
    assert validate_frame(x).valid


def test_c2_violation():
    W = ("u1", "u2")
    m = RelationalModel("ldm", 2, W, {BOX: {(a, b) for a in W for b in W}, "R1": {(a, a) for a in W},
                                      "R2": {(a, a) for a in W}})
    (bad,) = validate_frame(m).failures()
    assert bad.name == "C2" and bad.witness == ("u1", "u2")


def test_golden_frames(golden_dir):
    for case in json.loads((golden_dir / "frames.json").read_text()):
        report = validate_frame(RelationalModel.from_json(case["model"]))
        got = [(r.name, list(r.witness)) for r in report.failures()]
        want = [] if case["violated"] is None else [(case["violated"], case["witness"])]
        assert got == want, case["name"]


def test_witnesses_are_genuine():
    # re-check a C4 witness directly: two futures of w, related neither way
    m = RelationalModel("tstit", 1, ("a", "b", "c"), {
        BOX: {(x, x) for x in "abc"}, "R1": {(x, x) for x in "abc"}, AG: {(x, x) for x in "abc"},
        RG: {("a", "b"), ("a", "c")}}, frontier={"b", "c"})
    w, u, v = validate_frame(m).get("C4").witness
    assert m.holds(RG, w, u) and m.holds(RG, w, v) and u != v
    assert not m.holds(RG, u, v) and not m.holds(RG, v, u)


def test_frame_counts():
    assert len(list(enumerate_frames("ldm", 1, 2, 2))) == 3
    models = list(enumerate_models("ldm", 1, 1))
    assert len(models) == 2
    assert sorted(tuple(m.valuation["p"]) for m in models) == [(), (0,)]
    with pytest.raises(SemanticsError):
        list(enumerate_frames("tstit", 1, 2))


def test_p_implies_box_p_fails_at_two_worlds():
    f = fm.parse("p -> []p", "ldm", 1)
    assert valid_on_models(f, "ldm", 1, 1) is None
    m = valid_on_models(f, "ldm", 1, 2)
    assert m is not None and len(m.worlds) == 2


@pytest.mark.parametrize("tier", ["ldm", "xstit"])
def test_axioms_globally_true_on_valid_frames(tier):
    inst = axioms.corpus(tier, 2, depth=1)
    for m in enumerate_models(tier, 2, 2, ("p", "q")):
        for i in inst:
            (item,) = i.sequent.items
            assert all(model_check(m, w, item.formula) for w in m.worlds), i.schema


def test_json_round_trip():
    m = RelationalModel("xstit", 2, ("w",), {BOX: {("w", "w")}, group_tag({1}): {("w", "w")}}, {"p": {"w"}})
    again = RelationalModel.from_json(json.dumps(m.to_json()))
    assert again.relations == m.relations and again.valuation == m.valuation


def test_falsification_trace_names_the_world():
    m = RelationalModel("ldm", 1, (0, 1), {BOX: {(a, b) for a in (0, 1) for b in (0, 1)},
                                           "R1": {(a, b) for a in (0, 1) for b in (0, 1)}}, {"p": {0}})
    lines = falsification_trace(m, 0, fm.Box(p))
    assert any("w1" in line for line in lines)
