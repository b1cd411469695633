"""Firing-rate models and synaptic delay kernels.

A rate model gives the instantaneous discharge rate ``a(x, mu)`` of a neuron
at age ``x`` (time elapsed since its last discharge) under network activity
``mu``, together with closed-form partial derivatives and the age primitive
``A(x, mu) = int_0^x a(y, mu) dy``.  A delay kernel is the probability
density over elapsed times that weights past discharge flux into the present
network activity.

Three rate families are provided:

* :class:`ConstantRate`      -- age- and activity-independent rate.
* :class:`SoftSigmoidRate`   -- smooth saturating family, monotone in both
  age and activity, with closed-form primitive; the canonical smooth model.
* :class:`StepThresholdRate` -- hard jump at an activity-dependent age
  threshold; deliberately non-smooth and excluded from derivative-based
  operations and smoothness checks.

All evaluation methods broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy import integrate, special

from .errors import DiracNotDensity, DomainError, NonSmoothModel

RATE_ORDERS = ("a", "dx", "dmu", "dmumu")

_MONOTONE_TOL = 1e-12


def _arr(v) -> np.ndarray:
    return np.asarray(v, dtype=float)


def _unwrap(a: np.ndarray):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a


class RateModel:
    """Interface shared by all firing-rate families."""

    smooth: ClassVar[bool] = True

    @property
    def a0(self) -> float:
        """Asymptotic rate at large age under zero activity."""
        raise NotImplementedError

    @property
    def a1(self) -> float:
        """Asymptotic rate at large age and large activity."""
        raise NotImplementedError

    def rate(self, x, mu):
        raise NotImplementedError

    def rate_dx(self, x, mu):
        raise NotImplementedError

    def rate_dmu(self, x, mu):
        raise NotImplementedError

    def rate_dmumu(self, x, mu):
        raise NotImplementedError

    def primitive(self, x, mu):
        """Age primitive A(x, mu); falls back to adaptive quadrature."""
        xs = np.broadcast_arrays(_arr(x), _arr(mu))
        out = np.empty(xs[0].shape)
        for idx in np.ndindex(out.shape):
            out[idx] = integrate.quad(
                lambda y: float(self.rate(y, xs[1][idx])), 0.0, float(xs[0][idx]),
                epsrel=1e-10, limit=200,
            )[0]
        return _unwrap(out)

    def rate_at_infinity(self, mu):
        """Limit of a(x, mu) as the age grows, at fixed activity."""
        raise NotImplementedError

    def sup_rate(self, mu) -> float:
        return float(np.max(self.rate_at_infinity(mu)))

    def sup_rate_dx(self, mu) -> float:
        raise NotImplementedError

    def sup_rate_dmu(self) -> float:
        """Global bound on the activity derivative (contraction constant)."""
        raise NotImplementedError

    def smallest_age_at_fraction(self, frac: float) -> float:
        """Smallest x with a(x, 0) >= frac * a0, by bisection on the closed form.

        Monotonicity in the activity makes the zero-activity threshold valid
        for every mu.
        """
        target = frac * self.a0
        if float(self.rate(0.0, 0.0)) >= target:
            return 0.0
        hi = 1.0
        while float(self.rate(hi, 0.0)) < target:
            hi *= 2.0
            if hi > 1e12:
                raise DomainError("rate never reaches the requested fraction of a0")
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(self.rate(mid, 0.0)) >= target:
                hi = mid
            else:
                lo = mid
        return hi

    def x_half(self) -> float:
        return self.smallest_age_at_fraction(0.5)

    def x_three_quarters(self) -> float:
        return self.smallest_age_at_fraction(0.75)


@dataclass(frozen=True)
class ConstantRate(RateModel):
    """Rate independent of age and activity."""

    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("constant rate must be positive")

    @property
    def a0(self) -> float:
        return self.a

    @property
    def a1(self) -> float:
        return self.a

    def rate(self, x, mu):
        x, mu = np.broadcast_arrays(_arr(x), _arr(mu))
        return _unwrap(np.full(x.shape, self.a))

    def rate_dx(self, x, mu):
        x, mu = np.broadcast_arrays(_arr(x), _arr(mu))
        return _unwrap(np.zeros(x.shape))

    rate_dmu = rate_dx
    rate_dmumu = rate_dx

    def primitive(self, x, mu):
        x, mu = np.broadcast_arrays(_arr(x), _arr(mu))
        return _unwrap(self.a * x)

    def rate_at_infinity(self, mu):
        mu = _arr(mu)
        return _unwrap(np.full(mu.shape, self.a))

    def sup_rate_dx(self, mu) -> float:
        return 0.0

    def sup_rate_dmu(self) -> float:
        return 0.0


@dataclass(frozen=True)
class SoftSigmoidRate(RateModel):
    """Smooth saturating rate.

    ``a(x, mu) = (a0 + (a1 - a0) * (1 - exp(-lmu * mu))) * (1 - exp(-lx * x))``

    Nondecreasing in both arguments, twice differentiable with bounded
    derivatives, and its age primitive has a closed form, which keeps every
    downstream quadrature oracle exact.
    """

    a0: float
    a1: float
    lx: float
    lmu: float

    def __post_init__(self):
        if not (0 < self.a0 <= self.a1):
            raise ValueError("levels must satisfy 0 < a0 <= a1")
        if not (self.lx > 0 and self.lmu > 0):
            raise ValueError("shape parameters must be positive")

    def _level(self, mu):
        return self.a0 + (self.a1 - self.a0) * (-np.expm1(-self.lmu * _arr(mu)))

    def rate(self, x, mu):
        return _unwrap(self._level(mu) * (-np.expm1(-self.lx * _arr(x))))

    def rate_dx(self, x, mu):
        return _unwrap(self._level(mu) * self.lx * np.exp(-self.lx * _arr(x)))

    def rate_dmu(self, x, mu):
        gain = (self.a1 - self.a0) * self.lmu * np.exp(-self.lmu * _arr(mu))
        return _unwrap(gain * (-np.expm1(-self.lx * _arr(x))))

    def rate_dmumu(self, x, mu):
        gain = -(self.a1 - self.a0) * self.lmu**2 * np.exp(-self.lmu * _arr(mu))
        return _unwrap(gain * (-np.expm1(-self.lx * _arr(x))))

    def primitive(self, x, mu):
        x = _arr(x)
        return _unwrap(self._level(mu) * (x + np.expm1(-self.lx * x) / self.lx))

    def rate_at_infinity(self, mu):
        return _unwrap(self._level(mu))

    def sup_rate_dx(self, mu) -> float:
        return float(np.max(self._level(mu))) * self.lx

    def sup_rate_dmu(self) -> float:
        return (self.a1 - self.a0) * self.lmu


@dataclass(frozen=True)
class StepThresholdRate(RateModel):
    """Unit rate beyond an activity-dependent age threshold.

    ``a(x, mu) = 1`` for ``x > sigma(mu)`` and ``0`` otherwise, with the
    right-open convention ``a(sigma(mu), mu) = 0``.  The threshold is the
    clipped affine map ``sigma(mu) = max(sigma0 - slope * mu, 0)``, which is
    nonincreasing in the activity.  The jump makes the family non-smooth:
    derivative evaluations raise :class:`~elapse.errors.NonSmoothModel`.
    """

    sigma0: float
    slope: float = 0.0
    smooth: ClassVar[bool] = False

    def __post_init__(self):
        if self.sigma0 < 0 or self.slope < 0:
            raise ValueError("threshold parameters must be nonnegative")

    def threshold(self, mu):
        return _unwrap(np.maximum(self.sigma0 - self.slope * _arr(mu), 0.0))

    @property
    def a0(self) -> float:
        return 1.0

    @property
    def a1(self) -> float:
        return 1.0

    def rate(self, x, mu):
        x, mu = np.broadcast_arrays(_arr(x), _arr(mu))
        return _unwrap(np.where(x > self.threshold(mu), 1.0, 0.0))

    def rate_dx(self, x, mu):
        raise NonSmoothModel("step-threshold rate has no age derivative")

    def rate_dmu(self, x, mu):
        raise NonSmoothModel("step-threshold rate has no activity derivative")

    rate_dmumu = rate_dmu

    def primitive(self, x, mu):
        x, mu = np.broadcast_arrays(_arr(x), _arr(mu))
        return _unwrap(np.maximum(x - self.threshold(mu), 0.0))

    def rate_at_infinity(self, mu):
        mu = _arr(mu)
        return _unwrap(np.ones(mu.shape))

    def sup_rate_dx(self, mu) -> float:
        return math.inf

    def sup_rate_dmu(self) -> float:
        return math.inf


def eval_rate(model: RateModel, x, mu, order: str = "a"):
    """Evaluate the rate or one of its closed-form partial derivatives.

    ``order`` selects among ``"a"`` (the rate itself), ``"dx"``, ``"dmu"``
    and ``"dmumu"``.  Derivative orders are rejected for non-smooth models.
    """
    if order not in RATE_ORDERS:
        raise ValueError(f"order must be one of {RATE_ORDERS}")
    _check_domain(x, mu)
    if order == "a":
        return model.rate(x, mu)
    if not model.smooth:
        raise NonSmoothModel(f"derivative {order!r} undefined for {type(model).__name__}")
    return {"dx": model.rate_dx, "dmu": model.rate_dmu, "dmumu": model.rate_dmumu}[order](x, mu)


def primitive_A(model: RateModel, x, mu):
    """Age primitive A(x, mu) with A(0, mu) = 0."""
    _check_domain(x, mu)
    return model.primitive(x, mu)


def _check_domain(x, mu):
    if np.any(_arr(x) < 0):
        raise DomainError("age must be nonnegative")
    if np.any(_arr(mu) < 0):
        raise DomainError("activity must be nonnegative")


@dataclass
class RateHypothesisReport:
    """Outcome of the numerical standing-hypothesis checks on a rate model."""

    passes_a1: bool
    passes_a2: bool
    passes_a3: bool
    witnesses: list

    @property
    def all_pass(self) -> bool:
        return self.passes_a1 and self.passes_a2 and self.passes_a3


def check_rate_hypotheses(model: RateModel, x=None, mu=None) -> RateHypothesisReport:
    """Check monotonicity, asymptotic levels and smoothness on a sample lattice.

    * monotonicity: finite differences of ``a`` along both axes are >= 0;
    * levels: the far corner of the lattice reproduces the declared
      asymptotic rates and ``0 < a0 <= a1 < inf``;
    * smoothness: the largest second difference, normalized by the squared
      spacing, is stable when the lattice resolution doubles.  A jump makes
      that ratio blow up by a factor ~4, a twice-differentiable rate keeps
      it near 1.

    Every failing check contributes a witness ``(name, x, mu, value)``.
    """
    x = np.linspace(0.0, 20.0, 200) if x is None else np.asarray(x, dtype=float)
    mu = np.linspace(0.0, 10.0, 200) if mu is None else np.asarray(mu, dtype=float)
    if x.size < 8 or mu.size < 8:
        raise ValueError("lattice too small for finite-difference checks")
    witnesses: list = []

    X, MU = np.meshgrid(x, mu, indexing="ij")
    vals = np.asarray(model.rate(X, MU))

    passes_a1 = True
    for axis, name in ((0, "monotone_in_age"), (1, "monotone_in_activity")):
        diffs = np.diff(vals, axis=axis)
        if diffs.min() < -_MONOTONE_TOL:
            passes_a1 = False
            i, j = np.unravel_index(np.argmin(diffs), diffs.shape)
            witnesses.append((name, float(X[i, j]), float(MU[i, j]), float(diffs[i, j])))

    a0_est = float(model.rate(x[-1], 0.0))
    a1_est = float(model.rate(x[-1], mu[-1]))
    passes_a2 = (
        a0_est > 0
        and math.isfinite(a1_est)
        and math.isclose(a0_est, model.a0, rel_tol=1e-3)
        and math.isclose(a1_est, model.a1, rel_tol=1e-3)
        and a1_est >= a0_est - _MONOTONE_TOL
    )
    if not passes_a2:
        witnesses.append(("asymptotic_levels", float(x[-1]), float(mu[-1]), a1_est))

    passes_a3, witness = _second_difference_stable(model, x, mu)
    if witness is not None:
        witnesses.append(witness)
    return RateHypothesisReport(passes_a1, passes_a2, passes_a3, witnesses)


def _second_difference_stable(model, x, mu):
    def max_second_diff(xg, mug):
        X, MU = np.meshgrid(xg, mug, indexing="ij")
        vals = np.asarray(model.rate(X, MU))
        hx = xg[1] - xg[0]
        hmu = mug[1] - mug[0]
        d2x = np.abs(np.diff(vals, n=2, axis=0)) / hx**2
        d2mu = np.abs(np.diff(vals, n=2, axis=1)) / hmu**2
        cands = [(d2x, X[1:-1, :], MU[1:-1, :]), (d2mu, X[:, 1:-1], MU[:, 1:-1])]
        best = max(cands, key=lambda c: c[0].max())
        i, j = np.unravel_index(np.argmax(best[0]), best[0].shape)
        return float(best[0][i, j]), float(best[1][i, j]), float(best[2][i, j])

    coarse, _, _ = max_second_diff(x, mu)
    fine, wx, wmu = max_second_diff(
        np.linspace(x[0], x[-1], 2 * x.size - 1),
        np.linspace(mu[0], mu[-1], 2 * mu.size - 1),
    )
    if coarse < 1e-9 and fine < 1e-9:
        return True, None
    if fine <= 2.0 * coarse + 1e-9:
        return True, None
    return False, ("bounded_second_difference", wx, wmu, fine)


# ---------------------------------------------------------------------------
# Delay kernels
# ---------------------------------------------------------------------------


class DelayKernel:
    """Probability distribution over elapsed activity times."""

    is_dirac: ClassVar[bool] = False

    delta: float

    def density(self, y):
        raise NotImplementedError

    def density_prime(self, y):
        raise NotImplementedError

    def cdf(self, y):
        raise NotImplementedError

    def tail_mass(self, y) -> float:
        return float(1.0 - self.cdf(y))

    def history_span(self, tol: float = 1e-10) -> float:
        """Smallest span whose tail mass is at most ``tol``."""
        lo, hi = 0.0, 1.0
        while self.tail_mass(hi) > tol:
            hi *= 2.0
            if hi > 1e9:
                raise DomainError("kernel tail does not decay below tolerance")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.tail_mass(mid) <= tol:
                hi = mid
            else:
                lo = mid
        return hi

    def cell_masses(self, edges) -> np.ndarray:
        return np.diff(self.cdf(np.asarray(edges, dtype=float)))


@dataclass(frozen=True)
class DiracKernel(DelayKernel):
    """All activity weight at zero elapsed time: activity equals discharge flux."""

    is_dirac: ClassVar[bool] = True

    @property
    def delta(self) -> float:
        return math.inf

    def density(self, y):
        raise DiracNotDensity("the Dirac kernel has no pointwise density")

    density_prime = density

    def cdf(self, y):
        return _unwrap(np.where(_arr(y) >= 0.0, 1.0, 0.0))

    def history_span(self, tol: float = 1e-10) -> float:
        return 0.0


@dataclass(frozen=True)
class ExpKernel(DelayKernel):
    """Exponential delay density ``b(y) = exp(-y/tau)/tau``."""

    tau: float
    delta: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.delta is None:
            # default tail exponent safely inside the finiteness region
            object.__setattr__(self, "delta", 0.5 / self.tau)
        if not self.delta > 0:
            raise ValueError("tail exponent must be positive")

    def density(self, y):
        return _unwrap(np.exp(-_arr(y) / self.tau) / self.tau)

    def density_prime(self, y):
        return _unwrap(-np.exp(-_arr(y) / self.tau) / self.tau**2)

    def cdf(self, y):
        return _unwrap(-np.expm1(-_arr(y) / self.tau))

    def history_span(self, tol: float = 1e-10) -> float:
        return self.tau * math.log(1.0 / tol)

    def exp_moment(self) -> float:
        """Closed form of the weighted moment used by the tail hypothesis."""
        if self.delta >= 1.0 / self.tau:
            return math.inf
        return (1.0 / self.tau) * (1.0 + 1.0 / self.tau) / (1.0 / self.tau - self.delta)

    def _exp_moment_tail(self, y: float) -> float:
        rate = 1.0 / self.tau - self.delta
        if rate <= 0:
            return math.inf
        return (1.0 / self.tau) * (1.0 + 1.0 / self.tau) * math.exp(-rate * y) / rate


@dataclass(frozen=True)
class ErlangKernel(DelayKernel):
    """Erlang delay density of integer shape >= 2 and scale ``tau``."""

    shape: int
    tau: float
    delta: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.shape < 2 or int(self.shape) != self.shape:
            raise ValueError("shape must be an integer >= 2")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.delta is None:
            object.__setattr__(self, "delta", 0.5 / self.tau)
        if not self.delta > 0:
            raise ValueError("tail exponent must be positive")

    def density(self, y):
        y = _arr(y)
        k = self.shape
        norm = self.tau**k * math.factorial(k - 1)
        return _unwrap(np.where(y >= 0, y ** (k - 1) * np.exp(-y / self.tau) / norm, 0.0))

    def density_prime(self, y):
        y = _arr(y)
        k = self.shape
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(y > 0, (k - 1) / np.where(y > 0, y, 1.0) - 1.0 / self.tau, 0.0)
        return _unwrap(factor * self.density(y))

    def cdf(self, y):
        return _unwrap(special.gammainc(self.shape, _arr(y) / self.tau))

    def _exp_moment_tail(self, y: float) -> float:
        # valid upper bound once the density is past its mode
        rate = 1.0 / self.tau - self.delta
        if rate <= 0:
            return math.inf
        k = self.shape
        scale = (1.0 + 1.0 / self.tau) / (self.tau**k * math.factorial(k - 1))
        return scale * math.gamma(k) / rate**k * float(special.gammaincc(k, rate * y))


@dataclass
class DelayHypothesisReport:
    """Numerical verification of the delay-kernel standing hypotheses."""

    delta: float
    mass: float
    mass_ok: bool
    exp_moment: float
    finite: bool
    dirac_identity: bool = False


def delay_weight(kernel: DelayKernel, y):
    """Density value of the kernel at elapsed time ``y``."""
    if np.any(_arr(y) < 0):
        raise DomainError("elapsed time must be nonnegative")
    return kernel.density(y)


def check_delay_hypothesis(kernel: DelayKernel, y_max: float | None = None) -> DelayHypothesisReport:
    """Integrate ``exp(delta*y) * (b + |b'|)`` numerically plus an analytic tail.

    For the Dirac kernel there is nothing to integrate; the report only
    flags that network activity and discharge flux coincide.
    """
    if kernel.is_dirac:
        return DelayHypothesisReport(
            delta=math.inf, mass=1.0, mass_ok=True, exp_moment=1.0, finite=True,
            dirac_identity=True,
        )
    span = y_max if y_max is not None else kernel.history_span(1e-12)
    mass = integrate.quad(lambda y: float(kernel.density(y)), 0.0, span, limit=200)[0]
    mass += kernel.tail_mass(span)

    def integrand(y):
        return math.exp(kernel.delta * y) * (
            float(kernel.density(y)) + abs(float(kernel.density_prime(y)))
        )

    body = integrate.quad(integrand, 0.0, span, limit=400)[0]
    tail = kernel._exp_moment_tail(span)
    value = body + tail
    return DelayHypothesisReport(
        delta=float(kernel.delta),
        mass=float(mass),
        mass_ok=abs(mass - 1.0) <= 1e-8,
        exp_moment=float(value),
        finite=math.isfinite(value),
    )
