import random

import pytest

from g3stit import formula as fm
from g3stit.admissibility import invert, premise_of, weaken, _Fresh, _tree_labels
from g3stit.axioms import corpus
from g3stit.calculus import rule_table
from g3stit.proof import check_proof
from g3stit.prover import Derivable, admissibility_suite, prove
from g3stit.sequent import BOX, Labelled, RelAtom, Sequent, parse_sequent, singleton


def proof_of(s):
    out = prove(s)
    assert isinstance(out, Derivable)
    return out.proof


def test_id_generalization_example():
    f = fm.parse("[](p & q)", "ldm", 2)
    s = Sequent((Labelled(0, f), Labelled(0, fm.negate(f))), "ldm", 2)
    assert isinstance(prove(s), Derivable)


def test_weakening_example():
    s = singleton(fm.parse("p | ~p", "ldm", 2))
    tree = proof_of(s)
    table = rule_table("ldm", 2)
    w = weaken(tree, (RelAtom(BOX, 0, 1),), table)
    assert w.sequent == s.add(RelAtom(BOX, 0, 1))
    assert check_proof(w, table) and w.height() == tree.height()


def test_weakening_renames_clashing_eigenvariables():
    s = singleton(fm.parse("[]p -> []p", "ldm", 1), "ldm", 1)
    tree = proof_of(s)
    table = rule_table("ldm", 1)
    eigen = max(_tree_labels(tree))
    extra = (Labelled(eigen, fm.PosAtom("q")),)
    w = weaken(tree, extra, table)
    assert check_proof(w, table) and w.sequent == s.add(*extra)


def test_or_inversion_example():
    s = parse_sequent("w0: p | q ; w0: ~p ; w0: ~q", "ldm", 1)
    tree = proof_of(s)
    target = s.items[0]
    table = rule_table("ldm", 1)
    inv = invert(tree, target, table)
    assert inv.sequent == premise_of(s, target, None)
    assert check_proof(inv, table) and inv.height() <= tree.height()


def test_box_inversion_uses_a_fresh_label():
    s = singleton(fm.parse("[](p | ~p)", "ldm", 1), "ldm", 1)
    tree = proof_of(s)
    table = rule_table("ldm", 1)
    target = s.items[0]
    inv = invert(tree, target, table)
    y = _Fresh(_tree_labels(tree) | set(target.labels()))()
    assert inv.sequent == premise_of(s, target, y)
    assert check_proof(inv, table)


def test_inversion_traces_substitution_copies():
    # the equality forces (sub_eq) to copy the traced formula onto w1
    s = parse_sequent("w0 = w1 ; w0: [] (p | q) ; w1: <> (~p & ~q)", "xstit", 1)
    tree = proof_of(s)
    table = rule_table("xstit", 1)
    assert "sub_eq" in tree.rules_used()
    target = s.items[1]
    inv = invert(tree, target, table)
    y = _Fresh(_tree_labels(tree) | set(target.labels()))()
    assert inv.sequent == premise_of(s, target, y)
    assert check_proof(inv, table) and inv.height() <= tree.height()


@pytest.mark.parametrize("logic", ["ldm", "tstit", "xstit"])
def test_suite_on_axiom_instances(logic):
    rng = random.Random(3)
    seqs = [i.sequent for i in rng.sample(corpus(logic, 2), 12)]
    report = admissibility_suite(seqs, seed=1, id_formulas=10)
    assert report.ok, report.text()
    assert report.results["weakening"].checked == 12
    assert report.results["id-generalization"].passed == 10
