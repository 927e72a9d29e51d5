"""Small union-find over integer labels, copied (not shared) between branches."""

from __future__ import annotations


class UnionFind:
    __slots__ = ("parent",)

    def __init__(self, parent: dict[int, int] | None = None):
        self.parent = dict(parent) if parent else {}

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while root in parent and parent[root] != root:
            root = parent[root]
        while x != root:
            nxt = parent.get(x, x)
            parent[x] = root
            x = nxt
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge the classes of ``a`` and ``b``; the smaller root wins. Returns True on change."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.parent.setdefault(ra, ra)
        return True

    def same(self, a: int, b: int) -> bool:
        return a == b or self.find(a) == self.find(b)

    def copy(self) -> "UnionFind":
        return UnionFind(self.parent)

    def classes(self, labels) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for x in sorted(labels):
            out.setdefault(self.find(x), []).append(x)
        return out
