"""Optimal transport between discrete distributions.

Exact solvers only: the earth mover's distance is a transportation linear
program on the bipartite support graph, the 1-D case has a quantile-function
closed form used as an independent cross-check, and fixed-support barycenters
come from one joint linear program. A Wasserstein k-means built on these
pieces clusters histograms that share a common support.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import InvalidDistribution, InvalidK, MismatchedSupport

WEIGHT_TOL = 1e-9
MARGINAL_TOL = 1e-8
DECILE_BINS = 10


def decile_support() -> np.ndarray:
    """Bin indices 0..9; ground distance between bins i and j is |i - j|."""
    return np.arange(DECILE_BINS, dtype=float)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported probability distribution.

    `support` is (m,) for 1-D or (m, d); `weights` are nonnegative and sum
    to 1 within 1e-9. Support points must be pairwise distinct.
    """

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        sup = np.asarray(self.support, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if sup.ndim not in (1, 2):
            raise InvalidDistribution(f"support must be 1-D or 2-D, got ndim={sup.ndim}")
        if w.ndim != 1:
            raise InvalidDistribution("weights must be a flat vector")
        if sup.shape[0] != w.shape[0]:
            raise InvalidDistribution(
                f"{sup.shape[0]} support points but {w.shape[0]} weights"
            )
        if sup.shape[0] == 0:
            raise InvalidDistribution("empty support")
        if np.any(w < -WEIGHT_TOL):
            raise InvalidDistribution("negative weight")
        total = float(w.sum())
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvalidDistribution(f"weights sum to {total}, expected 1")
        pts = sup.reshape(sup.shape[0], -1)
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise InvalidDistribution("support points must be distinct")
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "weights", np.clip(w, 0.0, None))

    @classmethod
    def from_counts(cls, support, counts) -> "DiscreteDistribution":
        """Normalize raw counts to total mass 1."""
        c = np.asarray(counts, dtype=float)
        total = c.sum()
        if total <= 0:
            raise InvalidDistribution("counts must have positive total mass")
        return cls(np.asarray(support, dtype=float), c / total)

    @property
    def size(self) -> int:
        return self.support.shape[0]

    def support_2d(self) -> np.ndarray:
        return self.support.reshape(self.size, -1)


@dataclass(frozen=True)
class TransportPlan:
    """Optimal coupling between two distributions.

    Row sums reproduce the source weights and column sums the target weights
    (each within 1e-8); `cost` is sum(gamma * ground_cost).
    """

    gamma: np.ndarray
    cost: float

    @property
    def row_marginals(self) -> np.ndarray:
        return self.gamma.sum(axis=1)

    @property
    def col_marginals(self) -> np.ndarray:
        return self.gamma.sum(axis=0)


def cost_matrix(p1: DiscreteDistribution, p2: DiscreteDistribution, p: int = 1) -> np.ndarray:
    """Pairwise ground costs ||x_i - y_j||^p between the two supports."""
    a = p1.support_2d()
    b = p2.support_2d()
    if a.shape[1] != b.shape[1]:
        raise MismatchedSupport(
            f"ambient dimensions differ: {a.shape[1]} vs {b.shape[1]}"
        )
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    if p == 1:
        return d
    return d**p


def _marginal_constraints(m1: int, m2: int) -> sparse.csr_matrix:
    # rows 0..m1-1: out-flow per source point; rows m1..m1+m2-1: in-flow per target
    out_flow = sparse.kron(sparse.eye(m1), np.ones((1, m2)), format="csr")
    in_flow = sparse.kron(np.ones((1, m1)), sparse.eye(m2), format="csr")
    return sparse.vstack([out_flow, in_flow], format="csr")


def emd(
    p1: DiscreteDistribution, p2: DiscreteDistribution, p: int = 1
) -> tuple[float, TransportPlan]:
    """Exact earth mover's distance and an optimal transport plan.

    Solves the transportation linear program with ground cost ||x - y||^p and
    returns (optimum^(1/p), plan); at the default p = 1 the distance is the
    plan cost itself, and for general p it matches the 1-D closed form.
    """
    if p < 1:
        raise ValueError(f"ground power must be >= 1, got {p}")
    c = cost_matrix(p1, p2, p)
    m1, m2 = c.shape
    res = linprog(
        c.ravel(),
        A_eq=_marginal_constraints(m1, m2),
        b_eq=np.concatenate([p1.weights, p2.weights]),
        bounds=(0, None),
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    gamma = res.x.reshape(m1, m2)
    cost = float(res.fun)
    plan = TransportPlan(gamma=gamma, cost=cost)
    distance = cost if p == 1 else cost ** (1.0 / p)
    return distance, plan


def _sorted_1d(dist: DiscreteDistribution) -> tuple[np.ndarray, np.ndarray]:
    sup = dist.support
    if sup.ndim == 2:
        if sup.shape[1] != 1:
            raise InvalidDistribution("wst_1d requires 1-D supports")
        sup = sup[:, 0]
    order = np.argsort(sup)
    return sup[order], dist.weights[order]


def wst_1d(p1: DiscreteDistribution, p2: DiscreteDistribution, p: int = 1) -> float:
    """1-D Wasserstein distance via the quantile-function closed form.

    Merges the cumulative breakpoints of the two step CDFs and integrates
    |F1^-1 - F2^-1|^p exactly, then takes the p-th root. For equal-size
    unit-weight samples this is the mean |difference of sorted samples|^p
    to the 1/p.
    """
    if p < 1:
        raise ValueError(f"ground power must be >= 1, got {p}")
    x1, w1 = _sorted_1d(p1)
    x2, w2 = _sorted_1d(p2)
    c1 = np.cumsum(w1)
    c2 = np.cumsum(w2)
    i = j = 0
    t_prev = 0.0
    total = 0.0
    # sweep the merged quantile levels; each segment has constant quantiles
    while t_prev < 1.0 - 1e-12:
        t_next = min(c1[i], c2[j], 1.0)
        if t_next > t_prev:
            total += (t_next - t_prev) * abs(x1[i] - x2[j]) ** p
            t_prev = t_next
        if c1[i] <= t_prev + 1e-15 and i < x1.size - 1:
            i += 1
        elif c2[j] <= t_prev + 1e-15 and j < x2.size - 1:
            j += 1
        elif t_next <= t_prev:
            break
    return total if p == 1 else total ** (1.0 / p)


def barycenter(
    distributions, lam=None
) -> tuple[DiscreteDistribution, float]:
    """Weighted Wasserstein barycenter on the shared support (p = 1).

    Minimizes sum_k lam_k * W(bary, P_k) exactly by one joint linear program
    over the barycenter weights and one coupling per input. Returns the
    barycenter and the optimal objective value. Among equally good weight
    vectors the solver's deterministic choice is returned.
    """
    dists = list(distributions)
    if not dists:
        raise InvalidDistribution("barycenter requires at least one distribution")
    ref = dists[0].support_2d()
    for d in dists[1:]:
        s = d.support_2d()
        if s.shape != ref.shape or not np.array_equal(s, ref):
            raise MismatchedSupport("all distributions must share one support")
    n = len(dists)
    if lam is None:
        lam = np.full(n, 1.0 / n)
    else:
        lam = np.asarray(lam, dtype=float)
        if lam.shape != (n,) or np.any(lam < -WEIGHT_TOL) or abs(lam.sum() - 1.0) > WEIGHT_TOL:
            raise InvalidDistribution("lambda must be n nonnegative weights summing to 1")

    base = dists[0]
    if all(np.array_equal(d.weights, base.weights) for d in dists[1:]):
        # a single input, or all inputs equal: the optimum is the input itself
        return DiscreteDistribution(base.support, base.weights.copy()), 0.0

    m = ref.shape[0]
    cost = cost_matrix(base, base, p=1).ravel()

    # variables: w_bar (m), then gamma_k (m*m) for each k, row-major
    n_vars = m + n * m * m
    c_vec = np.zeros(n_vars)
    rows = []
    rhs = []
    out_flow = sparse.kron(sparse.eye(m), np.ones((1, m)), format="csr")
    in_flow = sparse.kron(np.ones((1, m)), sparse.eye(m), format="csr")
    neg_eye = -sparse.eye(m, format="csr")
    zero_m = sparse.csr_matrix((m, m))
    zero_g = sparse.csr_matrix((m, m * m))
    for k, d in enumerate(dists):
        c_vec[m + k * m * m : m + (k + 1) * m * m] = lam[k] * cost
        blocks_out = [neg_eye] + [out_flow if t == k else zero_g for t in range(n)]
        rows.append(sparse.hstack(blocks_out, format="csr"))
        rhs.append(np.zeros(m))
        blocks_in = [zero_m] + [in_flow if t == k else zero_g for t in range(n)]
        rows.append(sparse.hstack(blocks_in, format="csr"))
        rhs.append(d.weights)
    mass_row = sparse.hstack(
        [sparse.csr_matrix(np.ones((1, m)))] + [sparse.csr_matrix((1, m * m))] * n,
        format="csr",
    )
    rows.append(mass_row)
    rhs.append(np.ones(1))

    res = linprog(
        c_vec,
        A_eq=sparse.vstack(rows, format="csr"),
        b_eq=np.concatenate(rhs),
        bounds=(0, None),
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"barycenter LP failed: {res.message}")
    w_bar = res.x[:m]
    w_bar = np.clip(w_bar, 0.0, None)
    w_bar = w_bar / w_bar.sum()
    return DiscreteDistribution(dists[0].support, w_bar), float(res.fun)


@dataclass(frozen=True)
class KMeansResult:
    """Outcome of a Wasserstein k-means run."""

    assignments: np.ndarray
    barycenters: list[DiscreteDistribution]
    objective: float
    n_iter: int
    objective_history: list[float] = field(default_factory=list)


def wst_kmeans(
    distributions, k: int, seed: int = 0, max_iter: int = 100, p: int = 1
) -> KMeansResult:
    """k-means on distributions with EMD assignment and barycenter centroids.

    Starts from k members drawn without replacement, alternates nearest-center
    assignment with exact barycenter re-optimization, and stops when the
    assignment stabilizes. Both steps can only lower the objective, so it is
    non-increasing across iterations; a cluster left empty is re-seeded with
    the member farthest from its current center.
    """
    dists = list(distributions)
    n = len(dists)
    if k < 1 or k > n:
        raise InvalidK(f"k must be in [1, {n}], got {k}")
    ref = dists[0].support_2d()
    for d in dists[1:]:
        if not np.array_equal(d.support_2d(), ref):
            raise MismatchedSupport("all distributions must share one support")

    rng = np.random.default_rng(seed)
    centers = [dists[i] for i in rng.choice(n, size=k, replace=False)]
    assignments = np.full(n, -1, dtype=int)
    history: list[float] = []
    n_iter = 0

    for n_iter in range(1, max_iter + 1):
        dmat = np.empty((n, k))
        for i, d in enumerate(dists):
            for j, c in enumerate(centers):
                dmat[i, j] = emd(d, c, p=p)[0]
        new_assign = dmat.argmin(axis=1)

        for j in range(k):
            if not np.any(new_assign == j):
                member_d = dmat[np.arange(n), new_assign]
                worst = int(member_d.argmax())
                new_assign[worst] = j
                centers[j] = dists[worst]

        objective = 0.0
        for j in range(k):
            members = [dists[i] for i in np.flatnonzero(new_assign == j)]
            centers[j], cluster_cost = barycenter(members)
            # barycenter reports the uniform-lambda mean; the objective sums members
            objective += cluster_cost * len(members)
        history.append(objective)

        if np.array_equal(new_assign, assignments):
            assignments = new_assign
            break
        assignments = new_assign

    return KMeansResult(
        assignments=assignments,
        barycenters=centers,
        objective=history[-1],
        n_iter=n_iter,
        objective_history=history,
    )


def load_histograms(path) -> dict[str, DiscreteDistribution]:
    """Read `id,w1,...,w10` lines into decile distributions, normalizing mass."""
    support = decile_support()
    out: dict[str, DiscreteDistribution] = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != DECILE_BINS + 1:
                raise InvalidDistribution(
                    f"expected id plus {DECILE_BINS} weights, got {len(parts)} fields"
                )
            out[parts[0]] = DiscreteDistribution.from_counts(
                support, [float(v) for v in parts[1:]]
            )
    return out
