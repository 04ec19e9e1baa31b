"""Gaussian-process regression with the five stationary kernels used by the analysis.

Inputs are rescaled to the unit square (when box bounds are supplied) and
outputs standardized to zero mean / unit variance before conditioning, so the
downstream Pareto-distance threshold sees a consistent scale across problems.
The noise level is applied in standardized output units; its role here is
numerical jitter, since the game scores are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from scipy.optimize import minimize_scalar
from scipy.spatial.distance import cdist

from .errors import InvalidSpec, SingularCovariance

FAMILIES: tuple[str, ...] = ("SE", "EXP", "PE", "M32", "M52")

LENGTHSCALE_RANGE: tuple[float, float] = (1e-2, 2.0)
PE_POWER_GRID = np.linspace(0.1, 2.0, 20)
_MLE_RESTARTS = 5
_JITTER_LADDER = tuple(10.0 ** -e for e in range(10, 3, -1))  # 1e-10 .. 1e-4

_SQRT3 = math.sqrt(3.0)
_SQRT5 = math.sqrt(5.0)


@dataclass(frozen=True)
class KernelSpec:
    """Stationary kernel: family, lengthscale, and (PE only) power."""

    family: str
    lengthscale: float
    power: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidSpec(f"unknown kernel family {self.family!r}")
        if not self.lengthscale > 0:
            raise InvalidSpec(f"lengthscale must be positive, got {self.lengthscale}")
        if self.family == "PE":
            if self.power is None or not 0 < self.power <= 2:
                raise InvalidSpec(f"PE power must lie in (0, 2], got {self.power}")
        elif self.power is not None:
            raise InvalidSpec(f"power only applies to the PE family, not {self.family}")


def _kernel_of_dist(spec: KernelSpec, r: np.ndarray) -> np.ndarray:
    """Kernel value as a function of Euclidean distance r >= 0."""
    ell = spec.lengthscale
    if spec.family == "SE":
        return np.exp(-(r**2) / (2.0 * ell**2))
    if spec.family == "EXP":
        return np.exp(-r / ell)
    if spec.family == "PE":
        return np.exp(-((r / ell) ** spec.power))
    if spec.family == "M32":
        s = _SQRT3 * r / ell
        return (1.0 + s) * np.exp(-s)
    # M52
    s = _SQRT5 * r / ell
    return (1.0 + s + (5.0 / 3.0) * (r / ell) ** 2) * np.exp(-s)


def kernel_value(spec: KernelSpec, x, x_prime) -> float:
    """k(x, x') for a single pair of locations."""
    xa = np.asarray(x, dtype=float).ravel()
    xb = np.asarray(x_prime, dtype=float).ravel()
    r = float(np.linalg.norm(xa - xb))
    return float(_kernel_of_dist(spec, np.asarray(r)))


def _cholesky_with_jitter(K: np.ndarray, noise: float):
    """Factor K + noise*I, escalating jitter 1e-10..1e-4 before giving up."""
    n = K.shape[0]
    eye = np.eye(n)
    for jitter in (0.0,) + _JITTER_LADDER:
        try:
            factor = cho_factor(K + (noise + jitter) * eye, lower=True)
            return factor, jitter
        except LinAlgError:
            continue
    raise SingularCovariance(
        f"covariance factorization failed for n={n} even with jitter {_JITTER_LADDER[-1]:g}"
    )


def _neg_lml(spec: KernelSpec, dists: np.ndarray, ys: np.ndarray, noise: float) -> float:
    K = _kernel_of_dist(spec, dists)
    try:
        factor, _ = _cholesky_with_jitter(K, noise)
    except SingularCovariance:
        return math.inf
    alpha = cho_solve(factor, ys)
    logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    n = ys.size
    return 0.5 * float(ys @ alpha) + 0.5 * logdet + 0.5 * n * math.log(2.0 * math.pi)


def _search_lengthscale(family: str, dists, ys, noise, power=None) -> tuple[float, float]:
    """Bounded 1-D MLE over log-lengthscale, restarted on 5 log-spaced brackets."""
    lo, hi = LENGTHSCALE_RANGE
    edges = np.logspace(math.log10(lo), math.log10(hi), _MLE_RESTARTS + 1)

    def objective(log_ell: float) -> float:
        spec = KernelSpec(family, math.exp(log_ell), power)
        return _neg_lml(spec, dists, ys, noise)

    best_ell, best_val = None, math.inf
    for a, b in zip(edges[:-1], edges[1:]):
        res = minimize_scalar(
            objective,
            bounds=(math.log(a), math.log(b)),
            method="bounded",
            options={"xatol": 1e-3},
        )
        if res.fun < best_val:
            best_val = float(res.fun)
            best_ell = math.exp(float(res.x))
    return best_ell, best_val


@dataclass
class GpPosterior:
    """Immutable posterior: kernel, training data, and cached factorization."""

    kernel: KernelSpec
    X_train: np.ndarray
    y_train: np.ndarray
    noise: float
    bounds: tuple | None
    x_lo: np.ndarray
    x_span: np.ndarray
    y_shift: float
    y_scale: float
    jitter: float
    X_unit: np.ndarray = field(repr=False)
    _factor: tuple = field(repr=False)
    _alpha: np.ndarray = field(repr=False)
    _ys: np.ndarray = field(repr=False)

    def to_unit(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.x_lo) / self.x_span

    @property
    def raw_noise(self) -> float:
        """Noise variance expressed in score^2 units."""
        return self.noise * self.y_scale**2

    @property
    def prior_variance(self) -> float:
        """De-standardized prior variance k(x, x) * output_scale^2."""
        return self.y_scale**2

    def predict(self, x) -> tuple:
        """Posterior mean and variance in score units; accepts one point or a batch."""
        xa = np.asarray(x, dtype=float)
        single = xa.ndim == 1
        xu = self.to_unit(np.atleast_2d(xa))
        r = cdist(xu, self.X_unit)
        kvec = _kernel_of_dist(self.kernel, r)
        mu_s = kvec @ self._alpha
        v = cho_solve(self._factor, kvec.T)
        var_s = 1.0 - np.einsum("ij,ji->i", kvec, v)
        var_s = np.clip(var_s, 0.0, 1.0)
        mu = mu_s * self.y_scale + self.y_shift
        var = var_s * self.y_scale**2
        if single:
            return float(mu[0]), float(var[0])
        return mu, var

    def log_marginal_likelihood(self) -> float:
        """Log marginal likelihood of the (standardized) training data."""
        logdet = 2.0 * float(np.sum(np.log(np.diag(self._factor[0]))))
        n = self._ys.size
        return -0.5 * float(self._ys @ self._alpha) - 0.5 * logdet - 0.5 * n * math.log(2.0 * math.pi)


def fit(
    X,
    y,
    family: str = "SE",
    noise: float = 1e-8,
    bounds=None,
    lengthscale: float | None = None,
    power: float | None = None,
) -> GpPosterior:
    """Condition a GP on (X, y), choosing hyperparameters by MLE unless fixed.

    `bounds` are the search-box intervals used to rescale inputs to the unit
    square; without them the inputs are taken as already unit-scaled. For the
    PE family the power is searched on a 20-point grid over (0, 2] jointly
    with the lengthscale; passing `lengthscale`/`power` skips the search.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.size or y.size < 1:
        raise ValueError(f"incompatible training shapes {X.shape} / {y.shape}")
    if noise < 0:
        raise ValueError("noise variance must be nonnegative")
    if family not in FAMILIES:
        raise InvalidSpec(f"unknown kernel family {family!r}")

    if bounds is not None:
        lo = np.array([b[0] for b in bounds], dtype=float)
        hi = np.array([b[1] for b in bounds], dtype=float)
        span = hi - lo
    else:
        lo = np.zeros(X.shape[1])
        span = np.ones(X.shape[1])
    Xu = (X - lo) / span

    y_shift = float(np.mean(y))
    y_scale = float(np.std(y))
    if y_scale < 1e-12:
        y_scale = 1.0
    ys = (y - y_shift) / y_scale

    dists = cdist(Xu, Xu)

    if lengthscale is not None:
        spec = KernelSpec(family, lengthscale, power if family == "PE" else None)
    elif family == "PE":
        if power is not None:
            ell, _ = _search_lengthscale(family, dists, ys, noise, power)
            spec = KernelSpec(family, ell, power)
        else:
            best = (math.inf, None, None)
            for p in PE_POWER_GRID:
                ell, val = _search_lengthscale(family, dists, ys, noise, float(p))
                if val < best[0]:
                    best = (val, ell, float(p))
            spec = KernelSpec(family, best[1], best[2])
    else:
        ell, _ = _search_lengthscale(family, dists, ys, noise)
        spec = KernelSpec(family, ell)

    K = _kernel_of_dist(spec, dists)
    factor, jitter = _cholesky_with_jitter(K, noise)
    alpha = cho_solve(factor, ys)

    return GpPosterior(
        kernel=spec,
        X_train=X,
        y_train=y,
        noise=noise,
        bounds=tuple(tuple(b) for b in bounds) if bounds is not None else None,
        x_lo=lo,
        x_span=span,
        y_shift=y_shift,
        y_scale=y_scale,
        jitter=jitter,
        X_unit=Xu,
        _factor=factor,
        _alpha=alpha,
        _ys=ys,
    )


def predict(gp: GpPosterior, x):
    """Operation-style alias for GpPosterior.predict."""
    return gp.predict(x)


def log_marginal_likelihood(gp: GpPosterior) -> float:
    """Operation-style alias for GpPosterior.log_marginal_likelihood."""
    return gp.log_marginal_likelihood()
