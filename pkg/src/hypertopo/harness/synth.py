"""Synthetic masks whose Betti numbers are known by construction.

Solid blobs are filled rectangles. A blob carrying ``k`` holes is a
rectangle with ``k`` rectangular cavities laid out in a row, each separated
from its neighbours and from the outside by walls at least one pixel thick.
Blobs keep ``min_gap`` background pixels between each other.
"""
from dataclasses import dataclass

import numpy as np

from ..errors import CapacityError

MAX_TRIES = 2000


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    height: int
    width: int
    n_blobs: int = 1
    n_holes: int = 0
    min_gap: int = 2

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError("height and width must be positive")
        if self.n_blobs < 0 or self.n_holes < 0:
            raise ValueError("n_blobs and n_holes must be non-negative")
        if self.min_gap < 2:
            raise ValueError("min_gap must be at least 2")
        if self.n_holes > 0 and self.n_blobs == 0:
            raise ValueError("holes need at least one blob to live in")


def _blob(rng: np.random.Generator, holes: int) -> np.ndarray:
    if holes == 0:
        h, w = rng.integers(1, 7, size=2)
        return np.ones((h, w), dtype=np.uint8)
    cav_h, cav_w = (int(v) for v in rng.integers(1, 4, size=2))
    wall = int(rng.integers(1, 3))
    h = cav_h + 2 * wall
    w = holes * cav_w + (holes + 1) * wall
    blob = np.ones((h, w), dtype=np.uint8)
    for k in range(holes):
        c0 = wall + k * (cav_w + wall)
        blob[wall:wall + cav_h, c0:c0 + cav_w] = 0
    return blob


def synth_mask(spec: SynthSpec) -> np.ndarray:
    """Place blobs at random, returning a mask with Betti numbers ``(n_blobs, n_holes)``.

    Raises :class:`CapacityError` if a blob cannot be placed after a bounded
    number of attempts.
    """
    rng = np.random.default_rng(spec.seed)
    owner = rng.integers(0, max(spec.n_blobs, 1), size=spec.n_holes)
    holes_per_blob = np.bincount(owner, minlength=spec.n_blobs)[:spec.n_blobs]
    mask = np.zeros((spec.height, spec.width), dtype=np.uint8)
    # pixels reserved by placed blobs plus their gap margin
    reserved = np.zeros_like(mask, dtype=bool)
    g = spec.min_gap
    for holes in holes_per_blob.tolist():
        blob = _blob(rng, holes)
        bh, bw = blob.shape
        if bh > spec.height or bw > spec.width:
            raise CapacityError(f"a {bh}x{bw} blob does not fit a {spec.height}x{spec.width} grid")
        for _ in range(MAX_TRIES):
            r = int(rng.integers(0, spec.height - bh + 1))
            c = int(rng.integers(0, spec.width - bw + 1))
            if not reserved[r:r + bh, c:c + bw].any():
                break
        else:
            raise CapacityError(f"could not place blob after {MAX_TRIES} attempts")
        mask[r:r + bh, c:c + bw] = blob
        reserved[max(r - g, 0):r + bh + g, max(c - g, 0):c + bw + g] = True
    return mask


def perturb_probmap(mask, seed: int, noise: float = 0.3, flip_rate: float = 0.003) -> np.ndarray:
    """Noisy probability map derived from a mask, for evaluation fixtures.

    Each pixel keeps its label with additive uniform noise; a small fraction
    of pixels is flipped before noising to create topological errors.
    """
    rng = np.random.default_rng(seed)
    m = np.asarray(mask, dtype=np.float64)
    flips = rng.random(m.shape) < flip_rate
    base = np.where(flips, 1.0 - m, m)
    p = np.abs(base - noise * rng.random(m.shape))
    return np.clip(p, 0.0, 1.0).astype(np.float32).astype(np.float64)
