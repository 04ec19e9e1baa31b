"""Decile behavioral signatures and their transport distances from ideal.

For one subject (a test function or a user) and one uncertainty measure, the
signature is a 10-bin histogram of "% of decisions classified Pareto": one
percentage per counterpart subject, binned into deciles. A fully rational
cohort puts all mass in the top bin; distances from that ideal, barycenters,
and k-means clusters summarize how far behavior deviates.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyRecords, UnknownSubject
from .rationality import PARETO, MEASURES, UncertaintyMeasure
from .wasserstein import (
    DECILE_BINS,
    DiscreteDistribution,
    KMeansResult,
    barycenter,
    decile_support,
    emd,
    wst_kmeans,
)

AXES = ("function", "user")
IDEAL_ID = "ideal"


def decile_bin(percentage: float) -> int:
    """Bin index for a percentage: [0,10) -> 0, ..., [90,100) -> 9, 100 -> 9."""
    if not 0.0 <= percentage <= 100.0:
        raise ValueError(f"percentage out of range: {percentage}")
    return min(int(percentage // 10), DECILE_BINS - 1)


@dataclass(frozen=True)
class DecileSignature:
    """Histogram of counterpart subjects by decile of Pareto-rational share."""

    axis: str
    subject: str
    measure: UncertaintyMeasure | None
    counts: np.ndarray

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        c = np.asarray(self.counts, dtype=float)
        if c.shape != (DECILE_BINS,) or np.any(c < 0):
            raise ValueError("counts must be 10 nonnegative values")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @property
    def weights(self) -> np.ndarray:
        return self.counts / self.total

    def to_distribution(self) -> DiscreteDistribution:
        return DiscreteDistribution(decile_support(), self.weights)


def _for_measure(records, measure) -> list:
    tag = UncertaintyMeasure(measure).value
    return [r for r in records if r.uq == tag]


def pareto_percentage(records) -> float:
    """Share of records classified Pareto, in percent."""
    rows = list(records)
    if not rows:
        raise EmptyRecords("no records to summarize")
    hits = sum(1 for r in rows if r.label == PARETO)
    return 100.0 * hits / len(rows)


def _counterpart(axis: str):
    # on the function axis each counterpart is a player, and vice versa
    if axis == "function":
        return (lambda r: r.tf), (lambda r: r.user)
    return (lambda r: r.user), (lambda r: r.tf)


def build_signature(records, axis: str, subject: str, measure) -> DecileSignature:
    """One subject's decile histogram over its counterpart subjects."""
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    measure = UncertaintyMeasure(measure)
    key_of, other_of = _counterpart(axis)
    rows = [r for r in _for_measure(records, measure) if key_of(r) == subject]
    if not rows:
        raise UnknownSubject(f"no {measure.value} records for {axis} {subject!r}")
    counts = np.zeros(DECILE_BINS)
    others = sorted({other_of(r) for r in rows})
    for other in others:
        pct = pareto_percentage([r for r in rows if other_of(r) == other])
        counts[decile_bin(pct)] += 1
    return DecileSignature(axis=axis, subject=subject, measure=measure, counts=counts)


def all_signatures(records, axis: str, measure) -> dict[str, DecileSignature]:
    """Signatures for every subject on the axis, keyed and ordered by id."""
    rows = list(records)
    if not rows:
        raise EmptyRecords("no records to summarize")
    key_of, _ = _counterpart(axis)
    subjects = sorted({key_of(r) for r in _for_measure(rows, measure)})
    if not subjects:
        raise EmptyRecords(f"no records for measure {UncertaintyMeasure(measure).value}")
    return {s: build_signature(rows, axis, s, measure) for s in subjects}


def ideal_signature(axis: str) -> DecileSignature:
    """All mass in the top decile: every counterpart fully Pareto-rational."""
    counts = np.zeros(DECILE_BINS)
    counts[-1] = 1.0
    return DecileSignature(axis=axis, subject=IDEAL_ID, measure=None, counts=counts)


def distance_from_ideal(sig: DecileSignature) -> float:
    """EMD (p = 1, bin-index ground distance) to the all-top-bin histogram."""
    ideal = ideal_signature(sig.axis)
    return emd(sig.to_distribution(), ideal.to_distribution(), p=1)[0]


@dataclass(frozen=True)
class AxisReport:
    """Per-axis, per-measure signature bundle."""

    axis: str
    signatures: dict[UncertaintyMeasure, dict[str, DecileSignature]]
    ideal_distances: dict[UncertaintyMeasure, dict[str, float]]
    barycenters: dict[UncertaintyMeasure, DecileSignature]
    barycenter_distances: dict[UncertaintyMeasure, float]
    clusters: dict[UncertaintyMeasure, KMeansResult]


def _axis_report(records, axis: str, k: int, seed: int) -> AxisReport:
    signatures: dict[UncertaintyMeasure, dict[str, DecileSignature]] = {}
    ideal_distances: dict[UncertaintyMeasure, dict[str, float]] = {}
    barys: dict[UncertaintyMeasure, DecileSignature] = {}
    bary_dists: dict[UncertaintyMeasure, float] = {}
    clusters: dict[UncertaintyMeasure, KMeansResult] = {}
    for measure in MEASURES:
        sigs = all_signatures(records, axis, measure)
        signatures[measure] = sigs
        ideal_distances[measure] = {s: distance_from_ideal(g) for s, g in sigs.items()}
        dists = [g.to_distribution() for g in sigs.values()]
        bary, _ = barycenter(dists)
        bary_sig = DecileSignature(
            axis=axis, subject="barycenter", measure=measure, counts=bary.weights
        )
        barys[measure] = bary_sig
        bary_dists[measure] = distance_from_ideal(bary_sig)
        clusters[measure] = wst_kmeans(dists, k=min(k, len(dists)), seed=seed)
    return AxisReport(
        axis=axis,
        signatures=signatures,
        ideal_distances=ideal_distances,
        barycenters=barys,
        barycenter_distances=bary_dists,
        clusters=clusters,
    )


def signature_report(records, out_dir=None, k: int = 2, seed: int = 0) -> dict[str, AxisReport]:
    """Signatures, ideal distances, barycenters, and k-means for both axes.

    When `out_dir` is given, writes per-measure signature CSVs, a combined
    ideal-distance table per axis (columns H, SD, Z), and cluster assignment
    CSVs.
    """
    rows = list(records)
    if not rows:
        raise EmptyRecords("no records to report on")
    report = {axis: _axis_report(rows, axis, k, seed) for axis in AXES}
    if out_dir is not None:
        _write_report(report, Path(out_dir))
    return report


_TABLE_ORDER = (UncertaintyMeasure.H, UncertaintyMeasure.SD, UncertaintyMeasure.Z)


def _write_report(report: dict[str, AxisReport], out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for axis, ar in report.items():
        for measure, sigs in ar.signatures.items():
            path = out_dir / f"signatures_{axis}_{measure.value}.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["id"] + [f"bin{b + 1}" for b in range(DECILE_BINS)])
                for subject, sig in sigs.items():
                    w.writerow([subject] + [f"{c:g}" for c in sig.counts])
        path = out_dir / f"ideal_distance_{axis}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["id"] + [m.value for m in _TABLE_ORDER])
            subjects = sorted(ar.ideal_distances[_TABLE_ORDER[0]])
            for subject in subjects:
                w.writerow(
                    [subject]
                    + [f"{ar.ideal_distances[m][subject]:.6f}" for m in _TABLE_ORDER]
                )
            w.writerow(
                ["barycenter"]
                + [f"{ar.barycenter_distances[m]:.6f}" for m in _TABLE_ORDER]
            )
        for measure, km in ar.clusters.items():
            path = out_dir / f"clusters_{axis}_{measure.value}.csv"
            subjects = sorted(ar.signatures[measure])
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["id", "cluster"])
                for subject, label in zip(subjects, km.assignments):
                    w.writerow([subject, int(label)])
