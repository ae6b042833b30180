"""0-dimensional persistence of superlevel filtrations and diagram distances.

Diagrams are ``(n, 2)`` float arrays of ``(birth, death)`` rows with
``birth >= death``: a component appears when the threshold drops to its
highest pixel and dies when it merges into an older one. Every surviving
component dies at 0, the bottom of the [0, 1] range, so all points are
finite.
"""
import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .grid_topology import connected_components
from .grids import as_mask, as_probmap, check_same_shape
from .unionfind import UnionFind


@dataclass(frozen=True)
class DiagramDistanceConfig:
    kind: str = "wasserstein"
    q: float = 1.0

    def __post_init__(self):
        if self.kind not in ("wasserstein", "bottleneck"):
            raise ValueError(f"unknown diagram distance kind {self.kind!r}")
        if not self.q >= 1:
            raise ValueError(f"Wasserstein order q must be >= 1, got {self.q}")


def as_diagram(points) -> np.ndarray:
    d = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if np.any(d[:, 0] < d[:, 1]):
        raise ValueError("superlevel diagrams need birth >= death")
    return d


def h0_superlevel_diagram(p) -> np.ndarray:
    """H0 diagram of the superlevel filtration ``{p >= t}`` with 4-connectivity.

    Pixels are swept in descending value (raster order among equal values)
    and joined with a union-find. On a merge the component with the lower
    birth dies at the current value; equal births keep the component whose
    peak was swept first. Zero-persistence pairs are dropped, so plateaus
    yield a single point.
    """
    p = as_probmap(p)
    h, w = p.shape
    flat = p.ravel()
    order = np.argsort(-flat, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)

    uf = UnionFind(h * w)
    added = np.zeros(h * w, dtype=bool)
    points = []
    for idx in order.tolist():
        value = flat[idx]
        if value <= 0.0:
            # every remaining pixel is 0: all components merge at 0 with no new births
            break
        added[idx] = True
        r, c = divmod(idx, w)
        for nb in (idx - w if r > 0 else -1, idx + w if r < h - 1 else -1,
                   idx - 1 if c > 0 else -1, idx + 1 if c < w - 1 else -1):
            if nb < 0 or not added[nb]:
                continue
            ra, rb = uf.find(idx), uf.find(nb)
            if ra == rb:
                continue
            # the root is always the component's peak; elder = swept earlier
            if rank[ra] > rank[rb]:
                ra, rb = rb, ra
            if flat[rb] > value:
                points.append((flat[rb], value))
            uf.link(ra, rb)
    for idx in np.flatnonzero(added).tolist():
        if uf.find(idx) == idx:
            points.append((flat[idx], 0.0))
    return sort_diagram(np.array(points, dtype=np.float64).reshape(-1, 2))


def diagram_of_mask(y) -> np.ndarray:
    """One ``(1, 0)`` point per 4-connected foreground component."""
    _, n = connected_components(as_mask(y), 4)
    return np.tile([1.0, 0.0], (n, 1)).reshape(-1, 2)


def sort_diagram(d) -> np.ndarray:
    """Order by descending persistence, then descending birth."""
    d = as_diagram(d)
    if d.shape[0] == 0:
        return d
    order = np.lexsort((-d[:, 0], -(d[:, 0] - d[:, 1])))
    return d[order]


def diagram_to_json(d) -> str:
    return json.dumps([[float(b), float(e)] for b, e in sort_diagram(d)])


def diagram_from_json(text: str) -> np.ndarray:
    return as_diagram(json.loads(text))


def _linf_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(a[:, None, :] - b[None, :, :]).max(axis=2)


def diagonal_distance(d: np.ndarray) -> np.ndarray:
    """L-infinity distance of each point to the diagonal, ``(birth - death) / 2``."""
    return (d[:, 0] - d[:, 1]) / 2.0


def wasserstein_pd(a, b, q: float = 1.0) -> float:
    """q-Wasserstein distance with L-infinity ground metric.

    Solved exactly as an ``(m+n) x (m+n)`` assignment problem in which each
    point may instead be sent to its own diagonal projection.
    """
    if not q >= 1:
        raise ValueError(f"q must be >= 1, got {q}")
    a, b = as_diagram(a), as_diagram(b)
    m, n = a.shape[0], b.shape[0]
    if m + n == 0:
        return 0.0
    pa, pb = diagonal_distance(a) ** q, diagonal_distance(b) ** q
    big = np.inf
    cost = np.zeros((m + n, m + n))
    cost[:m, :n] = _linf_matrix(a, b) ** q
    cost[:m, n:] = big
    cost[:m, n:][np.arange(m), np.arange(m)] = pa
    cost[m:, :n] = big
    cost[m:, :n][np.arange(n), np.arange(n)] = pb
    rows, cols = linear_sum_assignment(cost)
    total = float(cost[rows, cols].sum())
    return total ** (1.0 / q)


def _perfect_matching_exists(a, b, pa, pb, cross, t) -> bool:
    m, n = a.shape[0], b.shape[0]
    adj = np.zeros((m + n, n + m), dtype=bool)
    adj[:m, :n] = cross <= t
    adj[np.arange(m), n + np.arange(m)] = pa <= t
    adj[m + np.arange(n), np.arange(n)] = pb <= t
    adj[m:, n:] = True
    match = maximum_bipartite_matching(csr_matrix(adj), perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck_pd(a, b) -> float:
    """Bottleneck distance with L-infinity ground metric.

    Binary search over the finite set of candidate costs, testing each with a
    maximum bipartite matching on the diagonal-augmented graph.
    """
    a, b = as_diagram(a), as_diagram(b)
    m, n = a.shape[0], b.shape[0]
    if m + n == 0:
        return 0.0
    pa, pb = diagonal_distance(a), diagonal_distance(b)
    cross = _linf_matrix(a, b)
    candidates = np.unique(np.concatenate([[0.0], cross.ravel(), pa, pb]))
    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_exists(a, b, pa, pb, cross, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def diagram_distance(a, b, cfg: DiagramDistanceConfig = DiagramDistanceConfig()) -> float:
    if cfg.kind == "bottleneck":
        return bottleneck_pd(a, b)
    return wasserstein_pd(a, b, cfg.q)


def pd_distance(pred, gt, cfg: DiagramDistanceConfig = DiagramDistanceConfig()) -> float:
    """Distance between the H0 diagram of a prediction and that of its ground truth."""
    pred = as_probmap(pred)
    gt = as_mask(gt)
    check_same_shape(pred, gt)
    return diagram_distance(h0_superlevel_diagram(pred), diagram_of_mask(gt), cfg)
