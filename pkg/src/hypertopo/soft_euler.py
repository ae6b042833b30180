"""Differentiable topology surrogate for probability maps.

Replacing binary pixels by probabilities in the local Euler formula gives a
multilinear polynomial in the pixel values, so its gradient is available in
closed form and the whole computation is O(N) in the number of pixels.
"""
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from .grid_topology import euler_characteristic
from .grids import as_mask, as_probmap, check_same_shape

DEFAULT_WARMUP_EPOCHS = 10
DEFAULT_TV_EPS = 1e-2


@dataclass(frozen=True)
class LossWeights:
    w_seg: float = 1.0
    w_contrast: float = 1.0
    w_topo: float = 1.0
    epoch: int = 0

    def __post_init__(self):
        for name in ("w_seg", "w_contrast", "w_topo"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.epoch < 0:
            raise ValueError("epoch must be non-negative")


def _blocks(p: np.ndarray):
    return p[:-1, :-1], p[:-1, 1:], p[1:, :-1], p[1:, 1:]


def soft_euler_char(p) -> float:
    """Soft Euler characteristic ``sum(P) - sum(P P_right) - sum(P P_down) + sum(2x2 products)``.

    On a binary map this is exactly the integer Euler characteristic.
    Out-of-range neighbours are omitted, not padded.

    >>> soft_euler_char([[0.5, 0.5], [0.5, 0.5]])
    1.0625
    """
    p = as_probmap(p)
    a, b, c, d = _blocks(p)
    return float(p.sum()
                 - (p[:, :-1] * p[:, 1:]).sum()
                 - (p[:-1, :] * p[1:, :]).sum()
                 + (a * b * c * d).sum())


def soft_euler_grad(p) -> np.ndarray:
    """Analytic gradient of :func:`soft_euler_char` with respect to every pixel."""
    p = as_probmap(p)
    g = np.ones_like(p)
    # each adjacent pair P_a P_b contributes -P_b to a and -P_a to b
    g[:, :-1] -= p[:, 1:]
    g[:, 1:] -= p[:, :-1]
    g[:-1, :] -= p[1:, :]
    g[1:, :] -= p[:-1, :]
    a, b, c, d = _blocks(p)
    g[:-1, :-1] += b * c * d
    g[:-1, 1:] += a * c * d
    g[1:, :-1] += a * b * d
    g[1:, 1:] += a * b * c
    return g


def soft_euler_loss(p, y) -> Tuple[float, np.ndarray]:
    """Squared mismatch between the soft and the ground-truth Euler characteristic.

    Returns
    -------
    value : float
        ``(chi_soft(p) - chi(y)) ** 2``
    grad : np.ndarray
        Gradient with respect to ``p``.
    """
    p = as_probmap(p)
    y = as_mask(y)
    check_same_shape(p, y)
    diff = soft_euler_char(p) - euler_characteristic(y)
    return diff * diff, 2.0 * diff * soft_euler_grad(p)


def tv_loss(p, smooth_eps: float = DEFAULT_TV_EPS) -> Tuple[float, np.ndarray]:
    """Smoothed anisotropic total variation.

    Each horizontal and vertical pixel difference ``t`` costs
    ``sqrt(t**2 + eps**2) - eps``, so constant maps score exactly zero and the
    loss is smooth everywhere.
    """
    if not smooth_eps > 0:
        raise ValueError(f"smooth_eps must be positive, got {smooth_eps}")
    p = as_probmap(p)
    eps2 = smooth_eps * smooth_eps
    value = 0.0
    g = np.zeros_like(p)
    for diff, lo, hi in (
        (p[:, 1:] - p[:, :-1], g[:, :-1], g[:, 1:]),
        (p[1:, :] - p[:-1, :], g[:-1, :], g[1:, :]),
    ):
        root = np.sqrt(diff * diff + eps2)
        # sqrt(t^2 + e^2) - e, rewritten to avoid cancellation for small t
        value += float((diff * diff / (root + smooth_eps)).sum())
        slope = diff / root
        hi += slope
        lo -= slope
    return value, g


def topo_loss(p, y, w_euler: float = 1.0, w_tv: float = 1.0,
              smooth_eps: float = DEFAULT_TV_EPS) -> Tuple[float, np.ndarray]:
    """Weighted sum of the Euler-characteristic match and the TV regulariser.

    The relative weighting is not calibrated; both weights default to 1.
    """
    ev, eg = soft_euler_loss(p, y)
    tv, tg = tv_loss(p, smooth_eps)
    return w_euler * ev + w_tv * tv, w_euler * eg + w_tv * tg


def loss_weight_schedule(epoch: int, warmup_epochs: int = DEFAULT_WARMUP_EPOCHS,
                         ramp_epochs: int = 0, base: LossWeights = LossWeights()) -> LossWeights:
    """Warm-up schedule for the topology weight.

    The topology term is off before ``warmup_epochs``, then ramps linearly to
    ``base.w_topo`` over ``ramp_epochs`` (a hard step when that is 0).
    Segmentation and contrastive weights pass through unchanged.
    """
    if epoch < 0:
        raise ValueError(f"epoch must be non-negative, got {epoch}")
    if warmup_epochs < 0 or ramp_epochs < 0:
        raise ValueError("warmup_epochs and ramp_epochs must be non-negative")
    if epoch < warmup_epochs:
        frac = 0.0
    elif ramp_epochs == 0:
        frac = 1.0
    else:
        frac = min(1.0, (epoch - warmup_epochs) / ramp_epochs)
    return replace(base, w_topo=base.w_topo * frac, epoch=epoch)
