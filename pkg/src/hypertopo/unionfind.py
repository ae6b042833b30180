import numpy as np


class UnionFind:
    """Array-backed disjoint sets over the integers ``0..n-1``.

    ``find`` uses path halving. ``link`` attaches one root below another
    without rank heuristics so the caller decides which element becomes the
    representative (raster-first pixel for labeling, elder component for
    persistence).

    >>> uf = UnionFind(4)
    >>> uf.link(uf.find(0), uf.find(2))
    >>> uf.find(2)
    0
    """

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def link(self, root: int, child: int) -> None:
        self.parent[child] = root

    def union_min(self, a: int, b: int) -> int:
        """Merge the sets of ``a`` and ``b``, keeping the smaller root."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return ra

    def roots(self) -> np.ndarray:
        return np.fromiter((self.find(i) for i in range(len(self.parent))), dtype=np.int64,
                           count=len(self.parent))
