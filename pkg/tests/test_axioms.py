import json

import pytest

from g3stit import axioms, formula as fm
from g3stit.sequent import Labelled

p, q = fm.PosAtom("p"), fm.PosAtom("q")


def by_name(logic, name):
    return next(s for s in axioms.schemas(logic) if s.name == name)


def test_schema_lists():
    assert len(axioms.schemas("ldm")) == 13
    assert len(axioms.schemas("tstit")) == 13 + 14
    assert {"IOA", "box-stit"} <= {s.name for s in axioms.schemas("ldm")}
    assert {"NCUH", "conn-FP", "conn-PF"} <= {s.name for s in axioms.schemas("tstit")}
    assert {"IOA-x", "mon-group"} <= {s.name for s in axioms.schemas("xstit")}
    assert "IRR" in {r.name for r in axioms.inference_rules("tstit")}


def test_ioa_instance_matches_the_derivation_root():
    (inst,) = [i for i in axioms.instantiate(by_name("ldm", "IOA"), 2) if i.formulas == (p, q)]
    (item,) = inst.sequent.items
    assert item == Labelled(0, fm.parse("[]<1>~p | []<2>~q | <>([1]p & [2]q)", "ldm", 2))


def test_ncuh_instance():
    inst = axioms.instantiate(by_name("tstit", "NCUH"), 1)
    assert [i.sequent.items[0].formula for i in inst if i.formulas == (p,)] == \
        [fm.parse("F <> p -> <Ag> F p", "tstit", 1)]


def test_t_axiom_is_nnf_expanded():
    inst = axioms.instantiate(by_name("ldm", "T-box"), 1)
    assert fm.parse("<>~p | p", "ldm", 1) in [i.sequent.items[0].formula for i in inst]


def test_monotonicity_only_for_subgroups():
    for inst in axioms.instantiate(by_name("xstit", "mon-group"), 2):
        assert inst.params["A"] <= inst.params["B"]


def test_xstit_ioa_disjoint_groups():
    inst = axioms.instantiate(by_name("xstit", "IOA-x"), 2)
    assert inst and all(not (i.params["A"] & i.params["B"]) for i in inst)


@pytest.mark.parametrize("logic", fm.LOGICS)
def test_instances_fit_their_tier(logic):
    for inst in axioms.corpus(logic, 2, depth=1):
        inst.sequent.check_tier()
        assert fm.fits_logic(inst.sequent.items[0].formula, logic)


def test_jsonl():
    lines = axioms.to_jsonl(axioms.corpus("ldm", 2)).splitlines()
    rows = [json.loads(x) for x in lines]
    assert len(rows) == len(axioms.corpus("ldm", 2))
    assert set(rows[0]) == {"schema", "parameters", "sequent"}


def test_pool_depth_bounds():
    with pytest.raises(ValueError):
        axioms.formula_pool(depth=3)
    assert len(axioms.formula_pool(depth=1)) == 4
