"""Regenerate the frame-condition golden set: python3 tests/golden/build_frames.py

One valid model per temporal tier, then one model per condition that breaks
that condition alone. Each entry records the exact witness the validator must
report.
"""

import json
import pathlib

from g3stit.semantics import RelationalModel, validate_frame

HERE = pathlib.Path(__file__).parent


def ident(*ws):
    return [(w, w) for w in ws]


def full(*ws):
    return [(a, b) for a in ws for b in ws]


def tstit(worlds, box, r1, r2, ag, rg, frontier=()):
    return {"tier": "tstit", "agents": 2, "worlds": list(worlds), "frontier": list(frontier),
            "relations": {"R[]": box, "R1": r1, "R2": r2, "RAg": ag, "RG": rg}}


def xstit(worlds, box, rx, r0, r1, r2, r12):
    return {"tier": "xstit", "agents": 2, "worlds": list(worlds),
            "relations": {"R[]": box, "RX": rx, "R{}": r0, "R{1}": r1, "R{2}": r2, "R{1,2}": r12}}


W2 = ("w0", "w1")
W3 = ("w0", "w1", "w2")
W4 = ("w0", "w1", "w2", "w3")

CASES = [
    # two one-world moments, w1 on the frontier
    ("tstit-valid", tstit(W2, ident(*W2), ident(*W2), ident(*W2), ident(*W2), [("w0", "w1")], ["w1"]), None),
    ("C1", tstit(W2, ident(*W2), full(*W2), ident(*W2), ident(*W2), [], W2), ("w0", "w1")),
    ("C2", tstit(W2, full(*W2), ident(*W2), ident(*W2), ident(*W2), [], W2), ("w0", "w1")),
    ("C3", tstit(W2, full(*W2), full(*W2), full(*W2), ident(*W2), [], W2), ("w0", "w1")),
    # w0 has two futures that are not related to each other
    ("C4", tstit(W3, ident(*W3), ident(*W3), ident(*W3), ident(*W3), [("w0", "w1"), ("w0", "w2")], ["w1", "w2"]),
     ("w0", "w1", "w2")),
    # w2 has two pasts that are not related to each other
    ("C5", tstit(W3, ident(*W3), ident(*W3), ident(*W3), ident(*W3), [("w0", "w2"), ("w1", "w2")], ["w2"]),
     ("w2", "w0", "w1")),
    # w2 shares w1's moment but no choice at w0 leads to it
    ("C6", tstit(W3, ident("w0") + full("w1", "w2"), ident("w0") + full("w1", "w2"), ident("w0") + full("w1", "w2"),
                 ident("w0") + full("w1", "w2"), [("w0", "w1")], ["w1", "w2"]), ("w0", "w2")),
    ("C7", tstit(("w",), ident("w"), ident("w"), ident("w"), ident("w"), ident("w")), ("w", "w")),
    ("xstit-valid", xstit(("w",), *[ident("w")] * 6), None),
    ("D1", xstit(W2, ident(*W2) + [("w0", "w1")], ident(*W2), ident(*W2) + [("w0", "w1")],
                 ident(*W2) + [("w0", "w1")], ident(*W2) + [("w0", "w1")], ident(*W2) + [("w0", "w1")]),
     ("w0", "w1")),
    ("D2", xstit(("w",), ident("w"), [], [], [], [], []), ("w",)),
    ("D3(i)", xstit(W2, ident(*W2), ident(*W2), ident(*W2) + [("w0", "w1")], ident(*W2), ident(*W2), ident(*W2)),
     ("w0", "w1")),
    ("D3(ii)", xstit(W2, full(*W2), ident(*W2), full(*W2), full(*W2), full(*W2), ident(*W2)), ("w0", "w1")),
    ("D3(iii)", xstit(W2, ident(*W2), ident(*W2), ident(*W2), ident(*W2) + [("w0", "w1")], ident(*W2), ident(*W2)),
     ("{1}", "{}", "w0", "w1")),
    # both agents decide between the two next moments, so their choices cannot be combined
    ("D3(iv)", xstit(W4, full("w0", "w1") + ident("w2", "w3"),
                     [("w0", "w2"), ("w1", "w3"), ("w2", "w2"), ("w3", "w3")],
                     [(a, b) for a in ("w0", "w1") for b in ("w2", "w3")] + ident("w2", "w3"),
                     [("w0", "w2"), ("w1", "w3")] + ident("w2", "w3"),
                     [("w0", "w2"), ("w1", "w3")] + ident("w2", "w3"),
                     [("w0", "w2"), ("w1", "w3")] + ident("w2", "w3")),
     ("{1}", "{2}", "w0", "w0", "w1")),
]


def main():
    out = []
    for name, model, witness in CASES:
        report = validate_frame(RelationalModel.from_json(model))
        failing = [(r.name, r.witness) for r in report.results if not r.ok]
        expected = [] if witness is None else [(name, tuple(witness))]
        if failing != expected:
            raise SystemExit(f"{name}: validator reports {failing}")
        model = dict(model, relations={t: [list(p) for p in ps] for t, ps in model["relations"].items()})
        out.append({"name": name, "model": model, "violated": None if witness is None else name,
                    "witness": None if witness is None else list(witness)})
    (HERE / "frames.json").write_text(json.dumps(out, indent=1) + "\n")
    print(len(out), "frames")


if __name__ == "__main__":
    main()
