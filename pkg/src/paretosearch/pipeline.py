"""End-to-end analysis over recorded game sessions.

Step 1 turns each session into per-decision records: for every prefix of
n >= 3 clicks it fits one GP per kernel family, scores the (n+1)-th click's
distance from the per-kernel Pareto frontiers under each uncertainty
measure, and labels it Pareto when the minimum distance is below the
threshold. Step 2 aggregates records into counts, decile signatures with
transport analyses, decision trees, and an average-cumulated-reward summary.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dtree, signatures
from .errors import EmptyRecords, ParetoSearchError, ParseError, SchemaError
from .gp import FAMILIES
from .rationality import (
    DEFAULT_GRID,
    DEFAULT_THRESHOLD,
    MEASURES,
    MIN_HISTORY,
    NOT_PARETO,
    PARETO,
    classify,
    decision_image,
    distance_to_front,
    fit_kernel_ensemble,
    frontier_for,
)
from .testbed import PROBLEM_IDS, get_problem, score

logger = logging.getLogger(__name__)

MAX_CLICKS = 20
SCORE_TOL = 1e-9
RECORD_HEADER = ("tf", "user", "iter", "uq", "dst", "cum.reward", "acr", "class")


@dataclass(frozen=True)
class Click:
    x: tuple[float, ...]
    y: float
    t: float = 0.0


@dataclass(frozen=True)
class GameSessionRecord:
    """One player's full run on one problem."""

    user_id: str
    problem_id: str
    clicks: tuple[Click, ...]
    complete: bool = True

    def __post_init__(self):
        problem = get_problem(self.problem_id)
        if not 1 <= len(self.clicks) <= MAX_CLICKS:
            raise ValueError(
                f"click count must be in [1, {MAX_CLICKS}], got {len(self.clicks)}"
            )
        for i, c in enumerate(self.clicks):
            expected = score(problem, c.x)
            if abs(expected - c.y) > SCORE_TOL:
                raise ValueError(
                    f"click {i}: score {c.y} disagrees with recomputation {expected}"
                )
        object.__setattr__(self, "clicks", tuple(self.clicks))


@dataclass(frozen=True)
class RationalityRecord:
    """One decision's rationality verdict under one uncertainty measure."""

    tf: str
    user: str
    iter: int
    uq: str
    dst: float
    cum_reward: float
    acr: float
    label: str

    def __post_init__(self):
        if self.iter < MIN_HISTORY + 1:
            raise ValueError(f"iter must be >= {MIN_HISTORY + 1}, got {self.iter}")
        if self.dst < 0:
            raise ValueError(f"dst must be nonnegative, got {self.dst}")
        if self.uq not in {m.value for m in MEASURES}:
            raise ValueError(f"unknown uncertainty tag {self.uq!r}")
        if self.label not in (PARETO, NOT_PARETO):
            raise ValueError(f"unknown class {self.label!r}")


def step1(
    sessions,
    threshold: float = DEFAULT_THRESHOLD,
    grid: int = DEFAULT_GRID,
    noise: float = 1e-8,
    raw_objectives: bool = False,
    families=FAMILIES,
) -> list[RationalityRecord]:
    """Per-decision rationality records for every analyzable click prefix.

    A full 20-click session yields 17 decisions (n = 3..19) under 3 measures,
    51 records. GP fits are shared across measures; a prefix where every
    kernel family fails to factorize is skipped with a warning.
    """
    records: list[RationalityRecord] = []
    ordered = sorted(sessions, key=lambda s: (s.user_id, s.problem_id))
    for session in ordered:
        problem = get_problem(session.problem_id)
        X = np.array([c.x for c in session.clicks], dtype=float)
        y = np.array([c.y for c in session.clicks], dtype=float)
        for n in range(MIN_HISTORY, len(session.clicks)):
            gps = fit_kernel_ensemble(
                X[:n], y[:n], problem, noise=noise, families=families
            )
            if not gps:
                logger.warning(
                    "skipping %s/%s iter %d: no kernel family fit",
                    session.user_id,
                    session.problem_id,
                    n + 1,
                )
                continue
            x_next = X[n]
            cum_reward = float(np.sum(y[:n]))
            for measure in MEASURES:
                dst = min(
                    distance_to_front(
                        decision_image(gp, x_next, measure),
                        frontier_for(gp, problem, measure, grid=grid),
                        raw_objectives=raw_objectives,
                    )
                    for gp in gps.values()
                )
                records.append(
                    RationalityRecord(
                        tf=session.problem_id,
                        user=session.user_id,
                        iter=n + 1,
                        uq=measure.value,
                        dst=dst,
                        cum_reward=cum_reward,
                        acr=cum_reward / n,
                        label=classify(dst, threshold),
                    )
                )
    return records


@dataclass(frozen=True)
class TreeReport:
    """One trained explainer tree with its quality numbers."""

    feature_order: tuple[str, ...]
    confidence_factor: float
    tree: dtree.TreeNode
    train_accuracy: float
    valid_accuracy: float
    confusion: np.ndarray
    nodes: int
    text: str


@dataclass(frozen=True)
class ReportBundle:
    """Everything step 2 derives from the record set."""

    pareto_counts: dict[str, int]
    record_counts: dict[str, int]
    best_measure: str
    signature_report: dict[str, signatures.AxisReport]
    tree_rows: list[dtree.ClassifiedRow]
    trees: dict[str, TreeReport]
    acr_summary: dict[str, dict[str, float | None]]


def _mean_or_none(values) -> float | None:
    vals = list(values)
    return float(np.mean(vals)) if vals else None


def _tree_report(rows, feature_order, cf, seed) -> TreeReport:
    train_rows, valid_rows = dtree.stratified_split(rows, seed=seed)
    if not valid_rows:
        train_rows, valid_rows = rows, rows
    tree = dtree.train(
        train_rows, confidence_factor=cf, feature_order=feature_order
    )
    train_acc, _ = dtree.evaluate(tree, train_rows)
    valid_acc, confusion = dtree.evaluate(tree, valid_rows)
    return TreeReport(
        feature_order=tuple(feature_order),
        confidence_factor=cf,
        tree=tree,
        train_accuracy=train_acc,
        valid_accuracy=valid_acc,
        confusion=confusion,
        nodes=dtree.node_count(tree),
        text=dtree.to_text(tree),
    )


def step2(
    records,
    out_dir=None,
    k: int = 2,
    seed: int = 0,
    cf_default: float = dtree.DEFAULT_CF,
    cf_inverted: float = 0.02,
) -> ReportBundle:
    """Aggregate records into counts, signatures, trees, and ACR summaries.

    The explainer dataset uses the measure with the most Pareto-classified
    decisions, one row per record of that measure. Two trees are trained:
    the default feature order at the default confidence factor and the
    inverted order at the stricter one.
    """
    records = list(records)
    if not records:
        raise EmptyRecords("step2 requires at least one record")

    tags = [m.value for m in MEASURES]
    pareto_counts = {
        t: sum(1 for r in records if r.uq == t and r.label == PARETO) for t in tags
    }
    record_counts = {t: sum(1 for r in records if r.uq == t) for t in tags}
    best_measure = max(tags, key=lambda t: pareto_counts[t])

    sig_report = signatures.signature_report(records, out_dir=out_dir, k=k, seed=seed)

    tree_rows = [
        dtree.ClassifiedRow(
            tf=r.tf, user=r.user, iter=r.iter, cum_reward=r.cum_reward, label=r.label
        )
        for r in records
        if r.uq == best_measure
    ]
    trees = {
        "default": _tree_report(
            tree_rows, dtree.DEFAULT_FEATURE_ORDER, cf_default, seed
        ),
        "inverted": _tree_report(
            tree_rows, dtree.INVERTED_FEATURE_ORDER, cf_inverted, seed
        ),
    }

    acr_summary = {
        t: {
            PARETO: _mean_or_none(
                r.acr for r in records if r.uq == t and r.label == PARETO
            ),
            NOT_PARETO: _mean_or_none(
                r.acr for r in records if r.uq == t and r.label == NOT_PARETO
            ),
        }
        for t in tags
    }

    bundle = ReportBundle(
        pareto_counts=pareto_counts,
        record_counts=record_counts,
        best_measure=best_measure,
        signature_report=sig_report,
        tree_rows=tree_rows,
        trees=trees,
        acr_summary=acr_summary,
    )
    if out_dir is not None:
        _write_bundle(bundle, Path(out_dir))
    return bundle


def _write_bundle(bundle: ReportBundle, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "measure_counts.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["uq", "pareto", "records"])
        for t in bundle.pareto_counts:
            w.writerow([t, bundle.pareto_counts[t], bundle.record_counts[t]])
    with (out_dir / "acr_summary.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["uq", "class", "mean_acr"])
        for t, by_class in bundle.acr_summary.items():
            for label, mean in by_class.items():
                w.writerow([t, label, "" if mean is None else f"{mean:.6f}"])
    for name, report in bundle.trees.items():
        (out_dir / f"tree_{name}.txt").write_text(report.text + "\n", encoding="utf-8")
    payload = {
        name: {
            "feature_order": list(report.feature_order),
            "confidence_factor": report.confidence_factor,
            "train_accuracy": report.train_accuracy,
            "valid_accuracy": report.valid_accuracy,
            "nodes": report.nodes,
            "tree": dtree.to_dict(report.tree),
        }
        for name, report in bundle.trees.items()
    }
    payload["best_measure"] = bundle.best_measure
    with (out_dir / "trees.json").open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)


def session_to_dict(session: GameSessionRecord) -> dict:
    return {
        "user_id": session.user_id,
        "problem_id": session.problem_id,
        "clicks": [{"x": list(c.x), "y": c.y, "t": c.t} for c in session.clicks],
        "complete": session.complete,
    }


def _session_from_dict(obj: dict) -> GameSessionRecord:
    try:
        clicks = tuple(
            Click(x=tuple(float(v) for v in c["x"]), y=float(c["y"]), t=float(c.get("t", 0.0)))
            for c in obj["clicks"]
        )
        return GameSessionRecord(
            user_id=str(obj["user_id"]),
            problem_id=str(obj["problem_id"]),
            clicks=clicks,
            complete=bool(obj.get("complete", True)),
        )
    except KeyError as exc:
        raise ValueError(f"missing field {exc.args[0]!r}") from exc


def load_sessions(path) -> list[GameSessionRecord]:
    """Read one session per JSONL line, validating clicks against the testbed."""
    sessions = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                sessions.append(_session_from_dict(obj))
            except ParseError:
                raise
            except (ValueError, TypeError, ParetoSearchError) as exc:
                raise ParseError(str(exc), line=lineno) from exc
    return sessions


def save_sessions(path, sessions) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in sessions:
            fh.write(json.dumps(session_to_dict(s)) + "\n")


def save_records(path, records) -> None:
    """CSV with the fixed header; floats keep full precision for round-trips."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_HEADER)
        for r in records:
            w.writerow(
                [r.tf, r.user, r.iter, r.uq, repr(r.dst), repr(r.cum_reward), repr(r.acr), r.label]
            )


def load_records(path) -> list[RationalityRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaError("empty records file") from None
        if header != RECORD_HEADER:
            raise SchemaError(
                f"header mismatch: expected {','.join(RECORD_HEADER)}, got {','.join(header)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(RECORD_HEADER):
                raise ParseError(f"expected {len(RECORD_HEADER)} fields, got {len(row)}", line=lineno)
            try:
                records.append(
                    RationalityRecord(
                        tf=row[0],
                        user=row[1],
                        iter=int(row[2]),
                        uq=row[3],
                        dst=float(row[4]),
                        cum_reward=float(row[5]),
                        acr=float(row[6]),
                        label=row[7],
                    )
                )
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
    return records


def simulate(games: int, seed: int = 0, policy: str = "random", clicks: int = MAX_CLICKS):
    """Synthetic sessions from a uniform-random click policy."""
    if policy != "random":
        raise ValueError(f"unknown policy {policy!r}")
    if not 1 <= clicks <= MAX_CLICKS:
        raise ValueError(f"clicks must be in [1, {MAX_CLICKS}]")
    rng = np.random.default_rng(seed)
    sessions = []
    for g in range(games):
        user = f"U{(g % 14) + 1:02d}"
        problem = get_problem(PROBLEM_IDS[g % len(PROBLEM_IDS)])
        lo = np.array([b[0] for b in problem.bounds])
        hi = np.array([b[1] for b in problem.bounds])
        pts = rng.uniform(lo, hi, size=(clicks, 2))
        session_clicks = tuple(
            Click(x=tuple(float(v) for v in p), y=score(problem, p), t=float(i))
            for i, p in enumerate(pts)
        )
        sessions.append(
            GameSessionRecord(
                user_id=user,
                problem_id=problem.id,
                clicks=session_clicks,
                complete=clicks == MAX_CLICKS,
            )
        )
    return sessions
