"""Regenerate the golden certificates: python3 tests/golden/build_golden.py

Both derivations follow the displayed proofs step by step. The dashed
transitivity steps are spelled out with (refl) and (eucl) instances.
"""

import json
import pathlib

from g3stit import formula as fm
from g3stit.calculus import match_item, rule_table
from g3stit.proof import ProofTree, check_proof, premise_sequents, proof_to_json
from g3stit.sequent import BOX, Labelled, RelAtom, Sequent, agent_tag, group_tag

HERE = pathlib.Path(__file__).parent


class Builder:
    def __init__(self, logic, agents=2):
        self.logic, self.agents = logic, agents
        self.table = rule_table(logic, agents)

    def schema(self, rule, params):
        for s in self.table:
            if s.name == rule and s.param_dict == params:
                return s
        raise KeyError((rule, params))

    def step(self, s, rule, principal, labels=None, params=None):
        """Apply ``rule`` backwards to ``s``; returns the node and its premises."""
        schema = self.schema(rule, params or {})
        lb, fb = {}, {}
        for pat, item in zip(schema.conclusion, principal):
            lb, fb = match_item(pat, item, lb, fb)
        lb.update(labels or {})
        prem = premise_sequents(s, schema, lb, fb, tuple(principal), ())
        return ProofTree(s, rule, schema.params, lb, fb, tuple(principal)), prem

    def chain(self, s, steps, finish):
        """Apply single-premise ``steps`` in order, then ``finish(top_sequent)`` for the last node."""
        root = node = None
        for rule, principal, labels, params in steps:
            new, prem = self.step(s, rule, principal, labels, params)
            if node is None:
                root = new
            else:
                node.children = [new]
            node, s = new, prem[0]
        top = finish(s)
        if node is None:
            return top
        node.children = [top]
        return root


def L(x, text, logic):
    return Labelled(x, fm.parse(text, logic, 2))


def ldm_ioa():
    b = Builder("ldm")
    x, y, z, v, u, w = range(6)
    box = BOX
    root_f = "[]<1>~p | []<2>~q | <>([1]p & [2]q)"
    s = Sequent((L(x, root_f, "ldm"),), "ldm", 2)
    f = fm.parse(root_f, "ldm", 2)
    left, dia = f.left, f.right
    a1, a2 = left.left, left.right
    goal = dia.body
    R = RelAtom
    steps = [
        ("or", [Labelled(x, f)], None, None),
        ("or", [Labelled(x, left)], None, None),
        ("box", [Labelled(x, a1)], {"v": y}, None),
        ("box", [Labelled(x, a2)], {"v": z}, None),
        ("IOA", [R(box, x, y), R(box, x, z)], {"u1": y, "u2": z, "v": v}, None),
        ("br_stit", [R(agent_tag(1), y, v)], None, {"i": 1}),
        # dashed line: R[] x v from R[] x y and R[] y v
        ("refl_box", [], {"w": x}, None),
        ("eucl_box", [R(box, x, y), R(box, x, x)], None, None),
        ("eucl_box", [R(box, y, x), R(box, y, v)], None, None),
        ("dia", [R(box, x, v), Labelled(x, dia)], None, None),
    ]

    def branch(agent, chooser, fresh, body, dual):
        t = agent_tag(agent)

        def finish(top):
            inner = [
                ("stit", [Labelled(v, body)], {"v": fresh}, {"i": agent}),
                # dashed line: R_i chooser fresh from R_i chooser v and R_i v fresh
                ("refl_stit", [], {"w": chooser}, {"i": agent}),
                ("eucl_stit", [R(t, chooser, v), R(t, chooser, chooser)], None, {"i": agent}),
                ("eucl_stit", [R(t, v, chooser), R(t, v, fresh)], None, {"i": agent}),
                ("stit_dual", [R(t, chooser, fresh), Labelled(chooser, dual)], None, {"i": agent}),
            ]
            return b.chain(top, inner, lambda s2: b.step(
                s2, "id", [Labelled(fresh, body.body), Labelled(fresh, fm.negate(body.body))])[0])
        return finish

    def split(top):
        node, prems = b.step(top, "and", [Labelled(v, goal)])
        node.children = [
            branch(1, y, u, goal.left, a1.body)(prems[0]),
            branch(2, z, w, goal.right, a2.body)(prems[1]),
        ]
        return node

    return b, b.chain(s, steps, split)


def xstit_ioa():
    b = Builder("xstit")
    w1, w2, w3, w4, w5, w6 = range(1, 7)
    A, B = frozenset({1}), frozenset({2})
    box = BOX
    root_f = "[]<{1}>x ~p | []<{2}>x ~q | <>([{1}]x p & [{2}]x q)"
    f = fm.parse(root_f, "xstit", 2)
    s = Sequent((Labelled(w1, f),), "xstit", 2)
    left, dia = f.left, f.right
    a1, a2 = left.left, left.right
    goal = dia.body
    R = RelAtom
    ab = {"A": A, "B": B}
    ctx = {"w1": w1, "w2": w2, "w3": w3, "w4": w4}
    steps = [
        ("or", [Labelled(w1, f)], None, None),
        ("or", [Labelled(w1, left)], None, None),
        ("box", [Labelled(w1, a1)], {"v": w2}, None),
        ("box", [Labelled(w1, a2)], {"v": w3}, None),
        ("IOA-E", [R(box, w1, w2), R(box, w1, w3)], {"w4": w4}, ab),
        ("dia", [R(box, w1, w4), Labelled(w1, dia)], None, None),
    ]

    def branch(group, rule_u, chooser, fresh, body, dual):
        t = group_tag(group)

        def finish(top):
            inner = [
                ("xstit", [Labelled(w4, body)], {"v": fresh}, {"A": group}),
                (rule_u, [R(t, w4, fresh)], dict(ctx), ab),
                ("xstit_dual", [R(t, chooser, fresh), Labelled(chooser, dual)], None, {"A": group}),
            ]
            return b.chain(top, inner, lambda s2: b.step(
                s2, "id", [Labelled(fresh, body.body), Labelled(fresh, fm.negate(body.body))])[0])
        return finish

    def split(top):
        node, prems = b.step(top, "and", [Labelled(w4, goal)])
        node.children = [
            branch(A, "IOA-U1", w2, w5, goal.left, a1.body)(prems[0]),
            branch(B, "IOA-U2", w3, w6, goal.right, a2.body)(prems[1]),
        ]
        return node

    return b, b.chain(s, steps, split)


def main():
    for name, make in (("ldm_ioa.json", ldm_ioa), ("xstit_ioa.json", xstit_ioa)):
        b, tree = make()
        verdict = check_proof(tree, b.table)
        if not verdict:
            raise SystemExit(f"{name}: {verdict.diagnostic} at {verdict.node.rule}")
        (HERE / name).write_text(json.dumps(proof_to_json(tree), indent=1) + "\n")
        print(name, "height", tree.height(), "nodes", tree.size())


if __name__ == "__main__":
    main()
