"""Segmentation scoring: confusion counts, Se/Sp/Acc/AUC, dataset runs, sweeps.

Per-image metrics are computed inside the field of view unless configured
otherwise; dataset aggregates are means of per-image metrics (not pooled
pixels).  AUC here is the single-operating-point form (Se + Sp) / 2.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import imgio
from .pipeline import run_pipeline


@dataclass
class MetricsRecord:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    se: Optional[float] = None
    sp: Optional[float] = None
    acc: Optional[float] = None
    auc: Optional[float] = None
    wall_time: Optional[float] = None
    image_id: str = ""


def confusion(pred, gt, roi):
    """Pixel counts (tp, fp, fn, tn) over the region of interest only."""
    pred = np.asarray(pred, bool)
    gt = np.asarray(gt, bool)
    roi = np.asarray(roi, bool)
    if not (pred.shape == gt.shape == roi.shape):
        raise ValueError(
            f"mask shapes differ: pred {pred.shape}, gt {gt.shape}, roi {roi.shape}"
        )
    tp = int((pred & gt & roi).sum())
    fp = int((pred & ~gt & roi).sum())
    fn = int((~pred & gt & roi).sum())
    tn = int((~pred & ~gt & roi).sum())
    return tp, fp, fn, tn


def metrics(counts, wall_time=None, image_id=""):
    """Derive Se/Sp/Acc/AUC from (tp, fp, fn, tn); undefined ratios stay None."""
    tp, fp, fn, tn = counts
    total = tp + fp + fn + tn
    se = tp / (tp + fn) if tp + fn > 0 else None
    sp = tn / (tn + fp) if tn + fp > 0 else None
    acc = (tp + tn) / total if total > 0 else None
    auc = (se + sp) / 2 if se is not None and sp is not None else None
    return MetricsRecord(tp, fp, fn, tn, se, sp, acc, auc, wall_time, image_id)


def _mean_or_none(values):
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def mean_record(records):
    """Aggregate row: summed counts, per-image-mean ratios, mean wall time."""
    return MetricsRecord(
        tp=sum(r.tp for r in records),
        fp=sum(r.fp for r in records),
        fn=sum(r.fn for r in records),
        tn=sum(r.tn for r in records),
        se=_mean_or_none([r.se for r in records]),
        sp=_mean_or_none([r.sp for r in records]),
        acc=_mean_or_none([r.acc for r in records]),
        auc=_mean_or_none([r.auc for r in records]),
        wall_time=_mean_or_none([r.wall_time for r in records]),
        image_id="mean",
    )


CSV_COLUMNS = ("image_id", "tp", "fp", "fn", "tn", "se", "sp", "acc", "auc", "seconds")


def _fmt(value, places):
    return "nan" if value is None else f"{value:.{places}f}"


def write_metrics_csv(path, records, include_timing=True):
    """Write per-image rows plus the aggregate 'mean' row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            seconds = r.wall_time if include_timing else 0.0
            writer.writerow([
                r.image_id, r.tp, r.fp, r.fn, r.tn,
                _fmt(r.se, 6), _fmt(r.sp, 6), _fmt(r.acc, 6), _fmt(r.auc, 6),
                _fmt(seconds, 3),
            ])


def evaluate_entry(entry, config):
    """Run the pipeline on one manifest entry and score it against its GT."""
    rgb = imgio.load_image(entry.image)
    gt = imgio.load_mask(entry.ground_truth)
    provided = imgio.load_mask(entry.fov) if entry.fov else None
    result = run_pipeline(rgb, config, fov=provided)
    roi = np.ones_like(gt) if config.full_frame_metrics else result.fov
    counts = confusion(result.mask, gt, roi)
    return metrics(counts, wall_time=result.seconds, image_id=entry.image.stem), result


def _evaluate_entry_worker(args):
    entry, config = args
    try:
        record, _ = evaluate_entry(entry, config)
        return record, None
    except Exception as exc:  # failures are recorded, the run continues
        return None, f"{entry.image.name}: {exc}"


def evaluate_dataset(manifest, config, jobs=1):
    """Score every manifest entry.

    Returns ``(records, mean, failures)``; records keep manifest order and
    failures is a list of 'image: error' strings for entries that crashed.
    """
    tasks = [(entry, config) for entry in manifest.entries]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_evaluate_entry_worker, tasks))
    else:
        outcomes = [_evaluate_entry_worker(t) for t in tasks]
    records = [rec for rec, err in outcomes if rec is not None]
    failures = [err for rec, err in outcomes if err is not None]
    return records, mean_record(records) if records else None, failures


@dataclass
class SweepRow:
    value: float
    mean_acc: Optional[float]
    failures: list = field(default_factory=list)


SWEEP_PARAMS = ("e1", "e2", "r", "s")


def sweep(manifest, param, values, config, jobs=1):
    """Rerun the full pipeline per threshold value, others at their defaults.

    Each row carries the mean accuracy for that value; per-image failures are
    recorded on the row and the sweep continues.
    """
    if param not in SWEEP_PARAMS:
        raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMS}, got {param!r}")
    rows = []
    for value in values:
        try:
            cfg = config.with_overrides(**{param: float(value)})
            _, mean, failures = evaluate_dataset(manifest, cfg, jobs=jobs)
        except Exception as exc:  # a bad value fails its row, not the sweep
            rows.append(SweepRow(float(value), None, [str(exc)]))
            continue
        rows.append(SweepRow(float(value), mean.acc if mean else None, failures))
    return rows


def write_sweep_csv(path, param, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow((param, "mean_acc", "failures"))
        for row in rows:
            writer.writerow([f"{row.value:g}", _fmt(row.mean_acc, 6), len(row.failures)])
