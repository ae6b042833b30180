"""The min-PD within top-K Dice checkpoint selection rule."""
import csv
from dataclasses import dataclass
from typing import Iterable, List

DEFAULT_K = 5
LOG_HEADER = ["checkpoint_id", "mean_dice", "mean_pd"]


@dataclass(frozen=True)
class CheckpointEntry:
    checkpoint_id: str
    mean_dice: float
    mean_pd: float


def select_checkpoint(entries: Iterable[CheckpointEntry], k: int = DEFAULT_K) -> str:
    """Among the ``k`` checkpoints with the highest Dice, return the one with the lowest PD.

    Ties at the top-k cutoff go to the lower PD, then the smaller id. Ties on
    PD inside the top k go to the higher Dice, then the smaller id. The
    result does not depend on input order.
    """
    entries = list(entries)
    if not entries:
        raise ValueError("no checkpoints to select from")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ids = [e.checkpoint_id for e in entries]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate checkpoint ids")
    top = sorted(entries, key=lambda e: (-e.mean_dice, e.mean_pd, e.checkpoint_id))[:k]
    best = min(top, key=lambda e: (e.mean_pd, -e.mean_dice, e.checkpoint_id))
    return best.checkpoint_id


def read_checkpoint_log(path) -> List[CheckpointEntry]:
    """Parse a ``checkpoint_id,mean_dice,mean_pd`` CSV log."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != LOG_HEADER:
            raise ValueError(f"expected header {','.join(LOG_HEADER)}, got {header}")
        entries = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"line {lineno}: expected 3 fields, got {len(row)}")
            try:
                entries.append(CheckpointEntry(row[0].strip(), float(row[1]), float(row[2])))
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric metric") from None
    return entries
