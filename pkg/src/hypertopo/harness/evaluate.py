"""Directory-level evaluation: pairing, parallel per-sample metrics, CSV output."""
import csv
import io
import json
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ..errors import HyperTopoError
from ..metrics import RECORD_FIELDS, EvalConfig, MetricsRecord, evaluate_sample
from ..persistence import DiagramDistanceConfig
from .codecs import read_mask, read_prediction
from .selection import DEFAULT_K

PRED_SUFFIXES = (".pmap", ".pgm")
GT_SUFFIX = ".pgm"


@dataclass
class RunConfig:
    eval: EvalConfig = field(default_factory=EvalConfig)
    select_k: int = DEFAULT_K

    def metadata(self) -> dict:
        return {
            "threshold": self.eval.threshold,
            "bf1_tolerance": self.eval.bf1_tolerance,
            "pd.kind": self.eval.pd.kind,
            "pd.q": self.eval.pd.q,
            "select.k": self.select_k,
        }


def parse_config(text: str, threshold: Optional[float] = None) -> RunConfig:
    """Parse flat ``key=value`` lines; ``#`` starts a comment.

    Recognised keys: threshold, bf1_tolerance, pd.kind, pd.q, select.k.
    Unknown keys and bad values raise ``ValueError``.
    """
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in ("threshold", "bf1_tolerance", "pd.kind", "pd.q", "select.k"):
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        values[key] = value
    pd = DiagramDistanceConfig(kind=values.get("pd.kind", "wasserstein"),
                               q=float(values.get("pd.q", 1.0)))
    cfg = EvalConfig(
        threshold=float(values.get("threshold", 0.5)) if threshold is None else threshold,
        bf1_tolerance=int(values.get("bf1_tolerance", 2)),
        pd=pd,
    )
    k = int(values.get("select.k", DEFAULT_K))
    if k < 1:
        raise ValueError("select.k must be >= 1")
    return RunConfig(cfg, k)


def load_config(path=None, threshold: Optional[float] = None) -> RunConfig:
    text = Path(path).read_text() if path else ""
    return parse_config(text, threshold)


def pair_files(pred_dir, gt_dir) -> Tuple[Dict[str, Tuple[Path, Path]], List[str]]:
    """Match prediction and ground-truth files by filename stem.

    Returns the pairs and a list of human-readable problems (unmatched or
    ambiguous stems), one per offending sample.
    """
    preds: Dict[str, List[Path]] = {}
    for p in sorted(Path(pred_dir).iterdir()):
        if p.is_file() and p.suffix.lower() in PRED_SUFFIXES:
            preds.setdefault(p.stem, []).append(p)
    gts = {p.stem: p for p in sorted(Path(gt_dir).iterdir())
           if p.is_file() and p.suffix.lower() == GT_SUFFIX}
    pairs, problems = {}, []
    for stem in sorted(set(preds) | set(gts)):
        if stem not in gts:
            problems.append(f"{stem}: no ground-truth file in {gt_dir}")
        elif stem not in preds:
            problems.append(f"{stem}: no prediction file in {pred_dir}")
        elif len(preds[stem]) > 1:
            problems.append(f"{stem}: ambiguous predictions {[p.name for p in preds[stem]]}")
        else:
            pairs[stem] = (preds[stem][0], gts[stem])
    return pairs, problems


def _evaluate_pair(stem: str, pred_path: Path, gt_path: Path, cfg: EvalConfig):
    try:
        return evaluate_sample(stem, read_prediction(pred_path), read_mask(gt_path), cfg), None
    except (OSError, HyperTopoError, ValueError) as exc:
        return None, f"{stem}: {type(exc).__name__}: {exc}"


def evaluate_pairs(pairs: Dict[str, Tuple[Path, Path]], cfg: EvalConfig,
                   workers: int = 1) -> Tuple[List[MetricsRecord], List[str]]:
    """Evaluate every pair, returning records and errors sorted by sample id."""
    stems = sorted(pairs)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda s: _evaluate_pair(s, *pairs[s], cfg), stems))
    records = [r for r, _ in results if r is not None]
    errors = [e for _, e in results if e is not None]
    return records, errors


def summary_rows(records: List[MetricsRecord]) -> List[list]:
    rows = []
    for name, fn in (("#mean", statistics.fmean), ("#median", statistics.median)):
        rows.append([name] + [repr(float(fn([getattr(r, f) for r in records])))
                              for f in RECORD_FIELDS[1:]])
    return rows


def records_to_csv(records: List[MetricsRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_FIELDS)
    for r in records:
        writer.writerow(r.csv_row())
    if records:
        writer.writerows(summary_rows(records))
    return buf.getvalue()


def records_to_jsonl(records: List[MetricsRecord]) -> str:
    return "".join(json.dumps(r.as_dict()) + "\n" for r in records)
