"""Proof trees: construction, checking against a rule table, and serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import formula as fm
from .calculus import (
    PEq, PLab, PRel, RuleSchema, build_item, match_item, table_index,
)
from .formula import group_text, render
from .sequent import Sequent, SequentError, label_text, parse_item, parse_sequent, rename_item


@dataclass
class ProofTree:
    """One rule application; ``sequent`` is its conclusion, ``children`` derive its premises."""

    sequent: Sequent
    rule: str
    params: tuple
    labels: dict
    formulas: dict
    principal: tuple
    delta: tuple = ()
    children: list = field(default_factory=list)

    @property
    def key(self) -> tuple:
        return (self.rule, self.params)

    def height(self) -> int:
        best, stack = 0, [(self, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            stack.extend((c, d + 1) for c in node.children)
        return best

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def walk(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def rules_used(self) -> list:
        return sorted({n.rule for n in self.walk()})

    @property
    def obligations(self) -> list:
        """(IOA-E) obligations opened in this proof, as (A, B, anchor labels)."""
        out = []
        for n in self.walk():
            if n.rule == "IOA-E":
                p = dict(n.params)
                out.append((p["A"], p["B"], tuple(n.labels[v] for v in ("w1", "w2", "w3", "w4") if v in n.labels)))
        return out


# ------------------------------------------------------------ materializing


def premise_sequents(s: Sequent, schema: RuleSchema, labels: dict, formulas: dict, principal: tuple, delta: tuple) -> list:
    """Premises of a rule application on conclusion ``s``."""
    if schema.is_substitution:
        w, u = labels["w"], labels["u"]
        return [s.add(*(rename_item(d, {w: u}) for d in delta))]
    context = s.remove(*principal)
    return [context.add(*(build_item(p, labels, formulas) for p in prem)) for prem in schema.premises]


# ---------------------------------------------------------------- checking


@dataclass
class CheckResult:
    ok: bool
    diagnostic: str = ""
    node: ProofTree | None = None

    def __bool__(self):
        return self.ok


def _side_condition(schema: RuleSchema) -> bool:
    p = schema.param_dict
    if schema.name == "C-Mon":
        return p["B"] < p["A"]
    if schema.name.startswith("IOA-"):
        return not (p["A"] & p["B"])
    return True


def _strip_merge(params):
    return tuple(x for x in params if x[0] != "merge")


def check_discipline(tree: ProofTree) -> CheckResult:
    """Every (IOA-U) use needs its (IOA-E) below and the other U-rule in a separate branch."""
    # paths: for each node, the chain of (IOA-E) nodes below it
    def ob_key(node):
        p = dict(node.params)
        alias = {}
        for block in p.get("merge", "").split(","):
            names = [x for x in block.split("=") if x]
            alias.update({n: names[0] for n in names})
        return (p["A"], p["B"], tuple(node.labels.get(alias.get(v, v)) for v in ("w1", "w2", "w3", "w4")))

    uses: dict = {}  # id(E node) -> list of (kind, path-of-child-indices)
    stack = [(tree, (), ())]
    while stack:
        node, path, below = stack.pop()
        if node.rule in ("IOA-U1", "IOA-U2"):
            key = ob_key(node)
            anchor = None
            for e_node, e_path in reversed(below):
                if ob_key(e_node) == key:
                    anchor = (e_node, e_path)
                    break
            if anchor is None:
                return CheckResult(False, "undischarged obligation: U-rule without (IOA-E) below", node)
            uses.setdefault(id(anchor[0]), (anchor[0], []))[1].append((node.rule, path, node))
        new_below = below + ((node, path),) if node.rule == "IOA-E" else below
        for k, c in enumerate(node.children):
            stack.append((c, path + (k,), new_below))
    for e_node, lst in uses.values():
        for kind, path, node in lst:
            other = "IOA-U2" if kind == "IOA-U1" else "IOA-U1"
            partners = [p for k2, p, _ in lst if k2 == other]
            separate = [p for p in partners if not (p[: len(path)] == path or path[: len(p)] == p)]
            if not separate:
                return CheckResult(False, f"undischarged obligation: {kind} has no {other} in a separate branch", node)
    return CheckResult(True)


def check_proof(tree: ProofTree, table: list) -> CheckResult:
    """Check ``tree`` against ``table``; returns the first violation found."""
    disc = check_discipline(tree)
    if not disc:
        return disc
    index = table_index(table)
    stack = [(tree, frozenset())]
    while stack:
        node, used_eigen = stack.pop()
        s = node.sequent
        schema = index.get(node.key)
        if schema is None:
            return CheckResult(False, f"unknown rule {node.rule} {dict(node.params)}", node)
        if not _side_condition(schema):
            return CheckResult(False, "side condition violated", node)
        if len(node.principal) != len(schema.conclusion):
            return CheckResult(False, "principal items do not fit the rule", node)
        try:
            s.remove(*node.principal)
        except SequentError:
            return CheckResult(False, "principal item missing from conclusion", node)
        lb, fb = {}, {}
        for pat, item in zip(schema.conclusion, node.principal):
            res = match_item(pat, item, lb, fb)
            if res is None:
                return CheckResult(False, "principal items do not match the rule", node)
            lb, fb = res
        for var, val in lb.items():
            if node.labels.get(var) != val:
                return CheckResult(False, f"label binding of {var} disagrees with the principal items", node)
        for var in schema.free_vars:
            if var not in node.labels:
                return CheckResult(False, f"label {var} unbound", node)
        for key, val in fb.items():
            if node.formulas.get(key) != val:
                return CheckResult(False, f"formula binding of {key} disagrees with the principal items", node)
        conclusion_labels = s.labels
        eigen = [node.labels.get(v) for v in sorted(schema.eigenvariables)]
        if any(e is None for e in eigen):
            return CheckResult(False, "eigenvariable unbound", node)
        if any(e in conclusion_labels for e in eigen) or len(set(eigen)) != len(eigen):
            return CheckResult(False, "eigenvariable clash", node)
        bound_others = {node.labels[v] for v in node.labels if v not in schema.eigenvariables}
        if any(e in bound_others for e in eigen):
            return CheckResult(False, "eigenvariable clash", node)
        if schema.is_substitution:
            if not node.delta:
                return CheckResult(False, "substitution without items", node)
            try:
                s.remove(*node.delta)
            except SequentError:
                return CheckResult(False, "substituted item missing from conclusion", node)
        elif node.delta:
            return CheckResult(False, "unexpected substitution items", node)
        try:
            premises = premise_sequents(s, schema, node.labels, node.formulas, node.principal, node.delta)
        except KeyError as exc:
            return CheckResult(False, f"unbound pattern variable {exc}", node)
        if len(premises) != len(node.children):
            if len(node.children) < len(premises):
                kind = "open leaf" if not node.children else "missing premise"
                return CheckResult(False, f"{kind}: {schema.display()} needs {len(premises)} premises", node)
            return CheckResult(False, "too many premises", node)
        for prem, child in zip(premises, node.children):
            if prem != child.sequent:
                return CheckResult(False, "premise does not match the rule instance", child)
            stack.append((child, used_eigen | frozenset(eigen)))
    return CheckResult(True)


# ----------------------------------------------------------- serialization


def _fbind_json(fb: dict) -> dict:
    return {k: (v if k.startswith("atom:") else render(v)) for k, v in sorted(fb.items())}


def _param_json(params) -> dict:
    return {k: (group_text(v) if isinstance(v, frozenset) else v) for k, v in params}


def _param_from_json(d: dict) -> tuple:
    out = []
    for k, v in d.items():
        if k in ("A", "B"):
            out.append((k, fm.canonical_group(x for x in v.strip("{}").split(",") if x.strip())))
        elif k == "i":
            out.append((k, int(v)))
        else:
            out.append((k, v))
    return tuple(sorted(out))


def node_to_json(node: ProofTree) -> dict:
    return {
        "rule": node.rule,
        "params": _param_json(node.params),
        "labels": {k: label_text(v) for k, v in sorted(node.labels.items())},
        "formulas": _fbind_json(node.formulas),
        "principal": [it.text() for it in node.principal],
        "delta": [it.text() for it in node.delta],
        "sequent": node.sequent.text(),
        "children": [node_to_json(c) for c in node.children],
    }


def proof_to_json(tree: ProofTree) -> dict:
    s = tree.sequent
    return {
        "logic": s.logic,
        "agents": s.agents,
        "root": s.text(),
        "height": tree.height(),
        "proof": node_to_json(tree),
    }


def _label_from(text: str) -> int:
    text = text.strip()
    if not text.startswith("w") or not text[1:].isdigit():
        raise ValueError(f"bad label {text!r}")
    return int(text[1:])


def node_from_json(d: dict, logic: str, agents: int) -> ProofTree:
    formulas = {}
    for k, v in d.get("formulas", {}).items():
        formulas[k] = v if k.startswith("atom:") else fm.parse(v, logic, agents)
    seq = parse_sequent(d["sequent"], logic, agents) if d["sequent"].strip() else Sequent((), logic, agents)
    return ProofTree(
        sequent=seq,
        rule=d["rule"],
        params=_param_from_json(d.get("params", {})),
        labels={k: _label_from(v) for k, v in d.get("labels", {}).items()},
        formulas=formulas,
        principal=tuple(parse_item(t, logic, agents) for t in d.get("principal", [])),
        delta=tuple(parse_item(t, logic, agents) for t in d.get("delta", [])),
        children=[node_from_json(c, logic, agents) for c in d.get("children", [])],
    )


def proof_from_json(data) -> ProofTree:
    if isinstance(data, str):
        data = json.loads(data)
    return node_from_json(data["proof"], data["logic"], int(data["agents"]))


def proof_text(tree: ProofTree, indent: str = "  ") -> str:
    """Indented rendering, conclusion first, premises nested below."""
    lines = []
    stack = [(tree, 0)]
    while stack:
        node, depth = stack.pop()
        binds = ", ".join(f"{k}={label_text(v)}" for k, v in sorted(node.labels.items()))
        params = ",".join(f"{k}={group_text(v) if isinstance(v, frozenset) else v}" for k, v in node.params)
        name = f"({node.rule}{'[' + params + ']' if params else ''})"
        lines.append(f"{indent * depth}{name} {binds}".rstrip())
        lines.append(f"{indent * depth}  |- {node.sequent.text()}")
        for c in reversed(node.children):
            stack.append((c, depth + 1))
    return "\n".join(lines)
