import json
import random
from itertools import product

import pytest

from g3stit import formula as fm
from g3stit.calculus import (
    PEq, PRel, SystemObligation, applicable, closure_instances, dump_table, rule_table,
)
from g3stit.generate import random_sequent
from g3stit.semantics import enumerate_models
from g3stit.sequent import AG, BOX, RG, RG_COMP, RX, Labelled, RelAtom, Sequent, agent_tag, group_tag, satisfies


def named(table, name):
    return [s for s in table if s.name == name and not s.closure_of]


def test_ldm_ioa_schema():
    (ioa,) = named(rule_table("ldm", 2), "IOA")
    assert ioa.conclusion == (PRel(BOX, "w", "u1"), PRel(BOX, "w", "u2"))
    assert ioa.eigenvariables == {"v"}
    (prem,) = ioa.premises
    assert PRel(agent_tag(1), "u1", "v") in prem and PRel(agent_tag(2), "u2", "v") in prem


def test_ioa_arity_follows_agent_count():
    (ioa,) = named(rule_table("ldm", 3), "IOA")
    assert len(ioa.conclusion) == 3


def test_conn_g_has_three_premises():
    (conn,) = named(rule_table("tstit", 1), "conn_G")
    assert len(conn.premises) == 3


def test_det_x_produces_an_equality():
    (det,) = named(rule_table("xstit", 2), "det_X")
    assert PEq("v", "u") in det.premises[0]


def test_eucl_box_closure_instance():
    (eucl,) = named(rule_table("ldm", 1), "eucl_box")
    inst = [c for c in closure_instances([eucl])]
    shapes = [(c.conclusion, c.premises) for c in inst]
    assert ((PRel(BOX, "w", "u"),), ((PRel(BOX, "w", "u"), PRel(BOX, "u", "u")),)) in shapes


def test_det_x_closure_instance():
    (det,) = named(rule_table("xstit", 1), "det_X")
    shapes = [(c.conclusion, c.premises) for c in closure_instances([det])]
    assert ((PRel(RX, "w", "u"),), ((PEq("u", "u"), PRel(RX, "w", "u")),)) in shapes


@pytest.mark.parametrize("logic", ["ldm", "tstit", "xstit"])
def test_closure_is_a_fixed_point(logic):
    table = rule_table(logic, 2)
    assert closure_instances(table) == []


def test_side_conditions():
    xs = rule_table("xstit", 2)
    for s in xs:
        p = s.param_dict
        if s.name == "C-Mon":
            assert p["B"] < p["A"]
        if s.name.startswith("IOA-"):
            assert not p["A"] & p["B"]


def test_principal_retention_flags():
    t = {s.name: s for s in rule_table("tstit", 1)}
    assert t["dia"].retains_principal and t["F"].retains_principal and t["ag_dual"].retains_principal
    assert not t["box"].retains_principal


def test_applicable_examples():
    ldm = rule_table("ldm", 2)
    s = Sequent((Labelled(0, fm.parse("p | q", "ldm", 2)),))
    assert [i.schema.name for i in applicable(s, ldm) if i.schema.kind == "logical"] == ["or"]
    r1 = Sequent((RelAtom(agent_tag(1), 0, 1),))
    br = [i for i in applicable(r1, ldm) if i.schema.name == "br_stit"]
    assert br and set(br[0].premises[0].items) == {RelAtom(agent_tag(1), 0, 1), RelAtom(BOX, 0, 1)}
    comp = Sequent((RelAtom(RG, 0, 1), RelAtom(RG_COMP, 0, 1)), "tstit", 1)
    hits = [i for i in applicable(comp, rule_table("tstit", 1)) if i.schema.name == "comp_G1"]
    assert hits and hits[0].premises == ()


def test_u_rules_need_an_open_obligation():
    xs = rule_table("xstit", 2)
    s = Sequent((RelAtom(group_tag({1}), 4, 5),), "xstit", 2)
    assert not [i for i in applicable(s, xs) if i.schema.name == "IOA-U1"]
    ob = SystemObligation(frozenset({1}), frozenset({2}), (1, 2, 3, 4))
    assert [i for i in applicable(s, xs, [ob]) if i.schema.name == "IOA-U1"]


@pytest.mark.parametrize("logic", ["ldm", "tstit", "xstit"])
def test_eigenvariables_are_fresh(logic):
    rng = random.Random(7)
    table = rule_table(logic, 2)
    for _ in range(30):
        s = random_sequent(rng, logic, 2, 1, 3)
        for inst in applicable(s, table):
            for v in inst.schema.eigenvariables:
                assert inst.labels[v] not in s.labels


def test_dump_table_is_json():
    data = json.loads(dump_table(rule_table("xstit", 2)))
    assert any(r["name"] == "IOA-E" and r["side_condition"] for r in data)


def _falsifying_extensions(m, s, interp):
    free = sorted(s.labels - set(interp))
    for combo in product(m.worlds, repeat=len(free)):
        full = {**interp, **dict(zip(free, combo))}
        if not satisfies(m, full, s):
            yield full


@pytest.mark.parametrize("logic,agents", [("ldm", 2), ("xstit", 2)])
def test_rules_are_locally_sound(logic, agents):
    """A model and interpretation falsifying a conclusion falsify some premise under some extension."""
    rng = random.Random(11)
    table = rule_table(logic, agents)
    models = list(enumerate_models(logic, agents, 2, ("p",)))
    checked = set()
    for _ in range(80):
        s = random_sequent(rng, logic, agents, 1, 3, atoms=("p",))
        for inst in applicable(s, table):
            checked.add(inst.schema.name)
            for m in models:
                for interp in _falsifying_extensions(m, s, {}):
                    assert any(next(_falsifying_extensions(m, prem, interp), None) is not None
                               for prem in inst.premises), inst.describe()
    assert len(checked) > 10
