"""Maps decisions into the (improvement, uncertainty) plane and scores them
by squared distance from grid-approximated Pareto frontiers.

A decision image is psi = (zeta, u) with zeta(x) = mu(x) - y+ and u one of
three uncertainty quantifications: predictive standard deviation (SD),
pointwise predictive entropy (H), or an inverse-distance measure (Z) that is
0 at previous decisions and approaches 1 far from all of them. Both axes are
maximized; nondominated images form the frontier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InsufficientHistory, SingularCovariance
from .gp import FAMILIES, GpPosterior, fit
from .testbed import TestProblem

MIN_HISTORY = 3
DEFAULT_GRID = 30
DEFAULT_THRESHOLD = 0.5

PARETO = "Pareto"
NOT_PARETO = "notPareto"

_LOG_2PI_E = math.log(2.0 * math.pi * math.e)


class UncertaintyMeasure(str, Enum):
    SD = "SD"
    H = "H"
    Z = "Z"


MEASURES: tuple[UncertaintyMeasure, ...] = (
    UncertaintyMeasure.SD,
    UncertaintyMeasure.H,
    UncertaintyMeasure.Z,
)


@dataclass(frozen=True)
class ObjectivePair:
    """A decision's image in the improvement/uncertainty plane."""

    zeta: float
    u: float


@dataclass(frozen=True)
class ParetoFront:
    """Nondominated (zeta, u) pairs from a grid cloud, with their locations.

    `zeta_range`/`u_range` record the min/max of each objective over the
    source cloud; distance_to_front uses them for min-max normalization.
    """

    points: np.ndarray
    locations: np.ndarray
    measure: UncertaintyMeasure | None = None
    kernel_family: str | None = None
    grid_size: int | None = None
    zeta_range: tuple[float, float] = (0.0, 0.0)
    u_range: tuple[float, float] = (0.0, 0.0)

    def __len__(self) -> int:
        return self.points.shape[0]


def improvement(gp: GpPosterior, x, y_plus: float):
    """zeta(x) = mu(x) - y+; negative where the surrogate predicts no gain."""
    mu, _ = gp.predict(x)
    return mu - y_plus


def inverse_distance_uncertainty(history_unit: np.ndarray, x_unit: np.ndarray):
    """Inverse-distance measure on unit-square coordinates.

    Returns 0 where x coincides with a history point (squared distance below
    1e-12), otherwise (2/pi) * atan(1 / sum_j w_j) with
    w_j = exp(-d_j^2) / d_j^2. Always in [0, 1).
    """
    hist = np.atleast_2d(np.asarray(history_unit, dtype=float))
    xa = np.asarray(x_unit, dtype=float)
    single = xa.ndim == 1
    xq = np.atleast_2d(xa)
    d2 = ((xq[:, None, :] - hist[None, :, :]) ** 2).sum(axis=2)
    coincident = (d2 <= 1e-12).any(axis=1)
    with np.errstate(divide="ignore", over="ignore"):
        w = np.exp(-d2) / d2
        w[d2 <= 1e-12] = np.inf
        total = w.sum(axis=1)
        z = (2.0 / math.pi) * np.arctan(1.0 / total)
    # the weight sum underflows to 0 at extreme distances; keep z strictly < 1
    z = np.minimum(z, np.nextafter(1.0, 0.0))
    z[coincident] = 0.0
    if single:
        return float(z[0])
    return z


def uncertainty(gp: GpPosterior, history, x, measure: UncertaintyMeasure):
    """u(x) under the chosen measure, in score units for SD/H.

    `history` holds the previous decision locations in original coordinates;
    when omitted the GP's training inputs are used. Z depends on the history
    only (mapped to the unit square); SD and H come from the posterior.
    """
    measure = UncertaintyMeasure(measure)
    if measure is UncertaintyMeasure.Z:
        hist = gp.X_train if history is None else np.atleast_2d(np.asarray(history, dtype=float))
        return inverse_distance_uncertainty(gp.to_unit(hist), gp.to_unit(np.asarray(x, dtype=float)))
    _, var = gp.predict(x)
    if measure is UncertaintyMeasure.SD:
        return np.sqrt(var)
    return 0.5 * (_LOG_2PI_E + np.log(var + gp.raw_noise))


def nondominated_mask(pairs: np.ndarray) -> np.ndarray:
    """Boolean mask of pairs not dominated under (maximize, maximize).

    A pair is dominated if some other pair is >= in both coordinates and
    strictly greater in at least one. Duplicated pairs on the frontier keep
    only the first occurrence.
    """
    pts = np.asarray(pairs, dtype=float)
    n = pts.shape[0]
    order = np.lexsort((-pts[:, 1], -pts[:, 0]))
    mask = np.zeros(n, dtype=bool)
    best_u = -math.inf
    i = 0
    while i < n:
        j = i
        z = pts[order[i], 0]
        while j < n and pts[order[j], 0] == z:
            j += 1
        group = order[i:j]
        group_best = pts[group, 1].max()
        if group_best > best_u:
            winners = group[pts[group, 1] == group_best]
            mask[winners.min()] = True  # dedup ties to one representative
            best_u = group_best
        i = j
    return mask


def pareto_front(
    pairs,
    locations=None,
    measure: UncertaintyMeasure | None = None,
    kernel_family: str | None = None,
    grid_size: int | None = None,
    rank_pairs=None,
) -> ParetoFront:
    """Nondominated subset of a (zeta, u) cloud.

    `rank_pairs`, when given, supplies the coordinates the dominance filter
    runs on while `pairs` supplies the reported values; a u axis that is an
    exact monotone transform of another quantity can then rank by the
    untransformed quantity instead of losing resolution to the transform.
    """
    pts = np.atleast_2d(np.asarray(pairs, dtype=float))
    if pts.size == 0:
        raise ValueError("pareto_front requires a nonempty collection")
    if locations is None:
        locations = np.zeros((pts.shape[0], 0))
    locs = np.atleast_2d(np.asarray(locations, dtype=float))
    if rank_pairs is None:
        rank = pts
    else:
        rank = np.atleast_2d(np.asarray(rank_pairs, dtype=float))
        if rank.shape != pts.shape:
            raise ValueError("rank_pairs must match pairs in shape")
    mask = nondominated_mask(rank)
    front_pts = pts[mask]
    front_locs = locs[mask]
    rank_front = rank[mask]
    order = np.lexsort((rank_front[:, 1], -rank_front[:, 0]))
    return ParetoFront(
        points=front_pts[order],
        locations=front_locs[order],
        measure=measure,
        kernel_family=kernel_family,
        grid_size=grid_size,
        zeta_range=(float(pts[:, 0].min()), float(pts[:, 0].max())),
        u_range=(float(pts[:, 1].min()), float(pts[:, 1].max())),
    )


def grid_locations(problem: TestProblem, grid: int = DEFAULT_GRID) -> np.ndarray:
    """Uniform grid x grid lattice over the problem bounds, corners included."""
    axes = [np.linspace(lo, hi, grid) for lo, hi in problem.bounds]
    g1, g2 = np.meshgrid(axes[0], axes[1], indexing="ij")
    return np.column_stack([g1.ravel(), g2.ravel()])


def frontier_for(
    gp: GpPosterior,
    problem: TestProblem,
    measure: UncertaintyMeasure,
    grid: int = DEFAULT_GRID,
    history=None,
) -> ParetoFront:
    """Pareto frontier of the (zeta, u) images over a grid x grid lattice."""
    measure = UncertaintyMeasure(measure)
    locs = grid_locations(problem, grid)
    y_plus = float(np.max(gp.y_train))
    zeta = improvement(gp, locs, y_plus)
    u = uncertainty(gp, history, locs, measure)
    pairs = np.column_stack([zeta, u])
    rank = None
    if measure is UncertaintyMeasure.H:
        # H is strictly increasing in sigma, but ln collapses tiny sigma
        # differences below float resolution; rank on sigma so the frontier
        # occupies exactly the SD locations, as the exact transform implies
        sd = uncertainty(gp, history, locs, UncertaintyMeasure.SD)
        rank = np.column_stack([zeta, sd])
    return pareto_front(
        pairs,
        locs,
        measure=measure,
        kernel_family=gp.kernel.family,
        grid_size=grid,
        rank_pairs=rank,
    )


def decision_image(
    gp: GpPosterior, x, measure: UncertaintyMeasure, history=None
) -> ObjectivePair:
    """psi-bar = (zeta(x), u(x)) for a single candidate decision."""
    y_plus = float(np.max(gp.y_train))
    zeta = improvement(gp, x, y_plus)
    u = uncertainty(gp, history, x, measure)
    return ObjectivePair(float(zeta), float(u))


def _normalize(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if hi - lo <= 0.0:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def distance_to_front(psi_bar, front: ParetoFront, raw_objectives: bool = False) -> float:
    """0 if psi-bar is nondominated w.r.t. the frontier's source cloud, else the
    minimum squared Euclidean distance to a frontier point.

    Unless `raw_objectives` is set, both axes are min-max normalized over the
    source cloud plus psi-bar, so a single threshold is meaningful across
    measures whose raw ranges differ wildly.
    """
    if isinstance(psi_bar, ObjectivePair):
        zb, ub = psi_bar.zeta, psi_bar.u
    else:
        zb, ub = float(psi_bar[0]), float(psi_bar[1])

    pts = front.points
    dominated = np.any(
        (pts[:, 0] >= zb) & (pts[:, 1] >= ub) & ((pts[:, 0] > zb) | (pts[:, 1] > ub))
    )
    if not dominated:
        return 0.0

    if raw_objectives:
        dz = pts[:, 0] - zb
        du = pts[:, 1] - ub
    else:
        z_lo = min(front.zeta_range[0], zb)
        z_hi = max(front.zeta_range[1], zb)
        u_lo = min(front.u_range[0], ub)
        u_hi = max(front.u_range[1], ub)
        dz = _normalize(pts[:, 0], z_lo, z_hi) - _normalize(np.asarray(zb), z_lo, z_hi)
        du = _normalize(pts[:, 1], u_lo, u_hi) - _normalize(np.asarray(ub), u_lo, u_hi)
    return float(np.min(dz**2 + du**2))


def fit_kernel_ensemble(
    X, y, problem: TestProblem, noise: float = 1e-8, families=FAMILIES
) -> dict[str, GpPosterior]:
    """One GP per kernel family; families whose factorization fails are dropped."""
    gps: dict[str, GpPosterior] = {}
    for family in families:
        try:
            gps[family] = fit(X, y, family=family, noise=noise, bounds=problem.bounds)
        except SingularCovariance:
            continue
    return gps


def evaluate_decision(
    problem: TestProblem,
    X,
    y,
    x_next,
    measure: UncertaintyMeasure,
    grid: int = DEFAULT_GRID,
    noise: float = 1e-8,
    raw_objectives: bool = False,
    families=FAMILIES,
) -> float:
    """Minimum distance of the decision's image from the per-kernel frontiers.

    Fits one GP per family on the n previous decisions (n >= 3), builds one
    frontier per family under the given measure, and returns the smallest
    distance_to_front among them.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] < MIN_HISTORY:
        raise InsufficientHistory(
            f"need at least {MIN_HISTORY} observations, got {X.shape[0]}"
        )
    gps = fit_kernel_ensemble(X, y, problem, noise=noise, families=families)
    if not gps:
        raise SingularCovariance("no kernel family produced a usable fit")
    dists = []
    for gp_model in gps.values():
        front = frontier_for(gp_model, problem, measure, grid=grid)
        psi = decision_image(gp_model, x_next, measure)
        dists.append(distance_to_front(psi, front, raw_objectives=raw_objectives))
    return min(dists)


def classify(dst: float, threshold: float = DEFAULT_THRESHOLD) -> str:
    """Pareto iff the distance is strictly below the threshold."""
    if dst < 0:
        raise ValueError(f"distance must be nonnegative, got {dst}")
    return PARETO if dst < threshold else NOT_PARETO


def acr(scores) -> float:
    """Arithmetic mean of the scores collected so far."""
    ya = np.asarray(scores, dtype=float).ravel()
    if ya.size == 0:
        raise ValueError("acr requires at least one score")
    return float(np.mean(ya))
