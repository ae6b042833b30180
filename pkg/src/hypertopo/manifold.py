"""Product-manifold geometry: Poincare ball, Euclidean and sphere branches.

Ball points live in ``{x : c * |x|^2 < 1}`` for curvature magnitude ``c > 0``.
All functions work on float64 numpy vectors.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateBatchError

BALL_DIM = 8
EUCLID_DIM = 32
SPHERE_DIM = 8
DEFAULT_TAU = 0.2
DEFAULT_EPS_BALL = 1e-5
DEFAULT_SPHERE_EPS = 1e-8


def clamp_to_ball(x, c: float = 1.0, eps_ball: float = DEFAULT_EPS_BALL) -> np.ndarray:
    """Radially rescale ``x`` so that ``sqrt(c) * |x| <= 1 - eps_ball``."""
    if not 0 < eps_ball < 0.1:
        raise ValueError(f"eps_ball must lie in (0, 0.1), got {eps_ball}")
    x = np.asarray(x, dtype=np.float64)
    limit = (1.0 - eps_ball) / np.sqrt(c)
    norm = np.linalg.norm(x)
    if norm > limit:
        return x * (limit / norm)
    return x.copy()


def _distance_parts(u, v, c, eps_ball):
    u = clamp_to_ball(u, c, eps_ball)
    v = clamp_to_ball(v, c, eps_ball)
    diff = u - v
    sq = float(diff @ diff)
    alpha = 1.0 - c * float(u @ u)
    beta = 1.0 - c * float(v @ v)
    # argument of arcosh minus one
    t = 2.0 * c * sq / (alpha * beta)
    return u, v, diff, sq, alpha, beta, t


def poincare_distance(u, v, c: float = 1.0, eps_ball: float = DEFAULT_EPS_BALL) -> float:
    """Geodesic distance on the Poincare ball of curvature ``-c``.

    ``(1/sqrt(c)) * arcosh(1 + 2c|u-v|^2 / ((1-c|u|^2)(1-c|v|^2)))``, evaluated
    as ``log1p(t + sqrt(t (t + 2)))`` so it stays accurate for nearby points
    and small ``c``. Points outside the ball are first clamped inside.

    >>> round(poincare_distance([0.0, 0.0], [0.5, 0.0]), 6)
    1.098612
    """
    if not c > 0:
        raise ValueError(f"curvature c must be positive, got {c}")
    *_, t = _distance_parts(u, v, c, eps_ball)
    return float(np.log1p(t + np.sqrt(t * (t + 2.0))) / np.sqrt(c))


def poincare_distance_grad(u, v, c: float = 1.0,
                           eps_ball: float = DEFAULT_EPS_BALL) -> Tuple[np.ndarray, np.ndarray]:
    """Partial derivatives of :func:`poincare_distance` in ``u`` and ``v``.

    The distance is not differentiable where ``u == v``; zero vectors are
    returned there. Gradients are taken at the clamped points.
    """
    u, v, diff, sq, alpha, beta, t = _distance_parts(u, v, c, eps_ball)
    if sq == 0.0:
        return np.zeros_like(u), np.zeros_like(v)
    # d/dt of arcosh(1+t)/sqrt(c)
    dd_dt = 1.0 / (np.sqrt(c) * np.sqrt(t * (t + 2.0)))
    k = 4.0 * c / (alpha * beta)
    dt_du = k * (diff + (c * sq / alpha) * u)
    dt_dv = k * (-diff + (c * sq / beta) * v)
    return dd_dt * dt_du, dd_dt * dt_dv


def expmap0(a, c: float = 1.0) -> np.ndarray:
    """Exponential map at the origin: ``tanh(sqrt(c)|a|) a / (sqrt(c)|a|)``."""
    a = np.asarray(a, dtype=np.float64)
    norm = np.sqrt(c) * np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros_like(a)
    return np.tanh(norm) * a / norm


@dataclass
class ProductPoint:
    h: np.ndarray
    e: np.ndarray
    s: np.ndarray

    def concat(self) -> np.ndarray:
        return np.concatenate([self.h, self.e, self.s])


@dataclass
class AdapterParams:
    W_H: np.ndarray
    b_H: np.ndarray
    W_E: np.ndarray
    b_E: np.ndarray
    W_S: np.ndarray
    b_S: np.ndarray
    sphere_eps: float = DEFAULT_SPHERE_EPS

    def __post_init__(self):
        if not self.sphere_eps > 0:
            raise ValueError("sphere_eps must be positive")
        d = self.W_H.shape[1]
        if d < 1:
            raise ValueError("input dimension must be at least 1")
        for W, b in ((self.W_H, self.b_H), (self.W_E, self.b_E), (self.W_S, self.b_S)):
            if W.ndim != 2 or W.shape[1] != d or b.shape != (W.shape[0],):
                raise ValueError("inconsistent adapter parameter shapes")
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise ValueError("adapter parameters must be finite")

    @property
    def input_dim(self) -> int:
        return self.W_H.shape[1]

    @classmethod
    def init(cls, input_dim: int, seed: int = 0, dims=(BALL_DIM, EUCLID_DIM, SPHERE_DIM),
             sphere_eps: float = DEFAULT_SPHERE_EPS) -> "AdapterParams":
        """Seeded uniform init in ``[-1/sqrt(D), 1/sqrt(D)]``."""
        rng = np.random.default_rng(seed)
        bound = 1.0 / np.sqrt(input_dim)
        arrays = []
        for k in dims:
            arrays.append(rng.uniform(-bound, bound, size=(k, input_dim)))
            arrays.append(rng.uniform(-bound, bound, size=k))
        return cls(*arrays, sphere_eps=sphere_eps)

    @classmethod
    def zeros(cls, input_dim: int, dims=(BALL_DIM, EUCLID_DIM, SPHERE_DIM)) -> "AdapterParams":
        arrays = []
        for k in dims:
            arrays += [np.zeros((k, input_dim)), np.zeros(k)]
        return cls(*arrays)


def adapter_forward(x, params: AdapterParams, c: float = 1.0,
                    eps_ball: float = DEFAULT_EPS_BALL) -> ProductPoint:
    """Project one feature token onto ball x Euclidean x sphere.

    The ball branch uses the norm-wise exponential map rather than an
    elementwise tanh: elementwise tanh can leave the unit ball once the
    dimension exceeds one.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.input_dim,):
        raise ValueError(f"expected input of length {params.input_dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input features must be finite")
    h = clamp_to_ball(expmap0(params.W_H @ x + params.b_H, c), c, eps_ball)
    e = np.maximum(0.0, params.W_E @ x + params.b_E)
    raw = params.W_S @ x + params.b_S
    s = raw / (np.linalg.norm(raw) + params.sphere_eps)
    return ProductPoint(h, e, s)


def _anchor_sets(labels: np.ndarray, anchors=None):
    """Yield (anchor, positive indices, negative indices) for usable anchors.

    Background (label 0) anchors treat other background points as positives.
    """
    n = labels.size
    for i in (range(n) if anchors is None else sorted(set(int(a) for a in anchors))):
        if not 0 <= i < n:
            raise IndexError(f"anchor index {i} out of range")
        same = labels == labels[i]
        same[i] = False
        pos = np.flatnonzero(same)
        neg = np.flatnonzero(labels != labels[i])
        if pos.size and neg.size:
            yield i, pos, neg


def _prepare(embeddings, instance_labels):
    z = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(instance_labels)
    if z.ndim != 2 or labels.shape != (z.shape[0],):
        raise ValueError("embeddings must be (n, dim) with one label per row")
    if np.any(labels < 0):
        raise ValueError("instance labels must be non-negative")
    return z, labels


def _clamp_rows(z, c, eps_ball):
    limit = (1.0 - eps_ball) / np.sqrt(c)
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    scale = np.where(norms > limit, limit / np.where(norms > 0, norms, 1.0), 1.0)
    return z * scale


def pairwise_poincare_distance(z, c: float = 1.0, eps_ball: float = DEFAULT_EPS_BALL) -> np.ndarray:
    """All-pairs :func:`poincare_distance` for the rows of ``z``."""
    z = _clamp_rows(np.asarray(z, dtype=np.float64), c, eps_ball)
    diff = z[:, None, :] - z[None, :, :]
    sq = (diff * diff).sum(axis=2)
    conf = 1.0 - c * (z * z).sum(axis=1)
    t = 2.0 * c * sq / (conf[:, None] * conf[None, :])
    return np.log1p(t + np.sqrt(t * (t + 2.0))) / np.sqrt(c)


def _pairwise_distance_grad(z, c, eps_ball):
    """Gradient of d(z_i, z_j) with respect to z_i, as an (n, n, dim) array."""
    z = _clamp_rows(z, c, eps_ball)
    diff = z[:, None, :] - z[None, :, :]
    sq = (diff * diff).sum(axis=2)
    conf = 1.0 - c * (z * z).sum(axis=1)
    alpha, beta = conf[:, None], conf[None, :]
    t = 2.0 * c * sq / (alpha * beta)
    root = np.sqrt(t * (t + 2.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        dd_dt = np.where(sq > 0, 1.0 / (np.sqrt(c) * root), 0.0)
    k = 4.0 * c / (alpha * beta) * dd_dt
    return k[:, :, None] * (diff + (c * sq / alpha)[:, :, None] * z[:, None, :])


def _lse(x):
    m = x.max()
    return m + np.log(np.exp(x - m).sum())


def contrastive_loss(embeddings, instance_labels, tau: float = DEFAULT_TAU, c: float = 1.0,
                     eps_ball: float = DEFAULT_EPS_BALL,
                     anchors: Optional[Sequence[int]] = None) -> float:
    """Hyperbolic InfoNCE-style loss over instance labels.

    For each anchor ``i`` with at least one positive (same label) and one
    negative (different label)::

        -log( sum_P exp(-d/tau) / (sum_P exp(-d/tau) + sum_N exp(-d/tau)) )

    summed over anchors, in log-sum-exp form. Anchors lacking positives or
    negatives are skipped; if none remain, :class:`DegenerateBatchError`.
    ``anchors`` restricts the sum to a subset of indices (every point is
    still available as a positive or negative).
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    z, labels = _prepare(embeddings, instance_labels)
    dist = pairwise_poincare_distance(z, c, eps_ball)
    total = 0.0
    used = 0
    for i, pos, neg in _anchor_sets(labels, anchors):
        logits = -dist[i] / tau
        # log(1 + S_neg / S_pos), accurate even when the ratio underflows
        total += np.logaddexp(0.0, _lse(logits[neg]) - _lse(logits[pos]))
        used += 1
    if used == 0:
        raise DegenerateBatchError("no anchor has both a positive and a negative")
    return float(total)


def contrastive_loss_grad(embeddings, instance_labels, tau: float = DEFAULT_TAU, c: float = 1.0,
                          eps_ball: float = DEFAULT_EPS_BALL,
                          anchors: Optional[Sequence[int]] = None) -> List[np.ndarray]:
    """Gradient of :func:`contrastive_loss` with respect to every embedding."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    z, labels = _prepare(embeddings, instance_labels)
    n = z.shape[0]
    dist = pairwise_poincare_distance(z, c, eps_ball)
    # dL/d(dist[i, j]) accumulated over anchors
    coef = np.zeros((n, n))
    used = 0
    for i, pos, neg in _anchor_sets(labels, anchors):
        logits = -dist[i] / tau
        both = np.concatenate([pos, neg])
        w_all = np.exp(logits[both] - _lse(logits[both]))
        w_pos = np.exp(logits[pos] - _lse(logits[pos]))
        # loss_i = LSE_all - LSE_pos, logits = -d / tau
        coef[i, both] -= w_all / tau
        coef[i, pos] += w_pos / tau
        used += 1
    if used == 0:
        raise DegenerateBatchError("no anchor has both a positive and a negative")
    # d(z_i, z_j) is symmetric, so the gradient for z_j is the transpose slice
    dgrad = _pairwise_distance_grad(z, c, eps_ball)
    sym = coef + coef.T
    grads = np.einsum("ij,ijk->ik", sym, dgrad)
    return list(grads)
