"""Central finite-difference verification of every analytic gradient."""
from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np

from .. import manifold, metrics, soft_euler

FD_STEP = 1e-5
TOLERANCE = 1e-5
DEFAULT_SIZES = (1, 2, 3, 5, 8, 12)


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """``max |a - n| / (1 + |a|)``, a relative error that stays defined at zero."""
    return float(np.max(np.abs(analytic - numeric) / (1.0 + np.abs(analytic)), initial=0.0))


def central_difference(f: Callable[[np.ndarray], float], x: np.ndarray,
                       h: float = FD_STEP) -> np.ndarray:
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat, g = x.reshape(-1), grad.reshape(-1)
    for k in range(flat.size):
        old = flat[k]
        flat[k] = old + h
        up = f(x)
        flat[k] = old - h
        down = f(x)
        flat[k] = old
        g[k] = (up - down) / (2.0 * h)
    return grad


def _prob(rng, sizes):
    shape = (int(rng.choice(sizes)), int(rng.choice(sizes)))
    return rng.uniform(0.01, 0.99, size=shape)


def _mask_like(rng, p):
    return (rng.random(p.shape) < 0.5).astype(np.uint8)


def _ball_points(rng, n, dim=manifold.BALL_DIM, max_norm=0.9):
    x = rng.normal(size=(n, dim))
    radii = max_norm * rng.random(n) ** (1.0 / dim)
    return x / np.linalg.norm(x, axis=1, keepdims=True) * radii[:, None]


# Each case draws one random instance and returns (x, f, analytic gradient at x).

def _case_soft_euler_char(rng, sizes):
    p = _prob(rng, sizes)
    return p, soft_euler.soft_euler_char, soft_euler.soft_euler_grad(p)


def _case_soft_euler_loss(rng, sizes):
    p = _prob(rng, sizes)
    y = _mask_like(rng, p)
    return p, lambda q: soft_euler.soft_euler_loss(q, y)[0], soft_euler.soft_euler_loss(p, y)[1]


def _case_tv_loss(rng, sizes):
    p = _prob(rng, sizes)
    return p, lambda q: soft_euler.tv_loss(q)[0], soft_euler.tv_loss(p)[1]


def _case_dice_loss(rng, sizes):
    p = _prob(rng, sizes)
    y = _mask_like(rng, p)
    return p, lambda q: metrics.dice_loss(q, y)[0], metrics.dice_loss(p, y)[1]


def _case_bce_loss(rng, sizes):
    p = np.clip(_prob(rng, sizes), 0.05, 0.95)
    y = _mask_like(rng, p)
    return p, lambda q: metrics.bce_loss(q, y)[0], metrics.bce_loss(p, y)[1]


def _case_poincare_distance(rng, sizes):
    c = float(rng.uniform(0.5, 2.0))
    uv = _ball_points(rng, 2) / np.sqrt(c)

    def f(x):
        return manifold.poincare_distance(x[0], x[1], c)

    du, dv = manifold.poincare_distance_grad(uv[0], uv[1], c)
    return uv, f, np.stack([du, dv])


def _case_contrastive_loss(rng, sizes):
    z = _ball_points(rng, 8)
    labels = rng.integers(0, 3, size=8)
    labels[:4] = [0, 0, 1, 1]

    def f(x):
        return manifold.contrastive_loss(x, labels, tau=0.2)

    return z, f, np.stack(manifold.contrastive_loss_grad(z, labels, tau=0.2))


CASES = {
    "soft_euler_char": _case_soft_euler_char,
    "soft_euler_loss": _case_soft_euler_loss,
    "tv_loss": _case_tv_loss,
    "dice_loss": _case_dice_loss,
    "bce_loss": _case_bce_loss,
    "poincare_distance": _case_poincare_distance,
    "contrastive_loss": _case_contrastive_loss,
}


@dataclass
class CheckResult:
    name: str
    trials: int
    max_rel_err: float

    @property
    def passed(self) -> bool:
        return self.max_rel_err < TOLERANCE

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name:<20} trials={self.trials:<4d} max_rel_err={self.max_rel_err:.3e} {status}"


def run_gradcheck(seed: int = 0, sizes: Sequence[int] = DEFAULT_SIZES,
                  trials: int = 100) -> List[CheckResult]:
    """Run every registered check on ``trials`` seeded random instances."""
    results = []
    for offset, (name, case) in enumerate(CASES.items()):
        rng = np.random.default_rng([seed, offset])
        worst = 0.0
        for _ in range(trials):
            x, f, analytic = case(rng, list(sizes))
            worst = max(worst, relative_error(analytic, central_difference(f, x)))
        results.append(CheckResult(name, trials, worst))
    return results
