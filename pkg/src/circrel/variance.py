"""Exact variance of the resampling estimator.

Write theta for the plan success probability and mu11 for the expectation of
the product of the fit indicator over two distinct realizations. Averaging r
realizations gives

    Var = theta / r + ((r - 1) / r) * mu11 - theta**2,

where the first and second moments of a single realization both equal theta.
Only mu11 feels the extraction scheme: two realizations are coupled exactly
where they re-extract the same sample elements.

Between two realizations, let omega1 be the set of legs whose delay indices
coincide and omega2 the set whose service indices coincide. Conditioned on
that pattern the legs decouple, and the conditional mixed moment is a product
of per-leg kernels h_i:

    both coincide      h = R(t)                 shared delay and service
    neither            h = R(t)**2              fully independent
    service only       h = E[F(t - Y)**2]       shared service draw Y
    delay only         h = E[G(t - X)**2]       shared delay draw X

with F, G the leg's delay and service CDFs and R the leg reliability. Index
coincidence at a leg with an n-element sample has probability 1/n,
independently across legs and families, so the pattern probabilities are
products of 1/n and (1 - 1/n) factors. mu11 is the pattern-probability
weighted sum of the conditional moments; because both factor per leg, the
4**k-term sum regroups into a k-factor product, which is the default method
(``factorized``). The literal sum (``enumerate``) is kept as an audit path.

For exponential legs with delay rate a and service rate b the two one-sided
kernels have closed forms,

    E[F(t - Y)**2] = 1 - (2a^2 e^{-bt} - 2b(2a - b) e^{-at}
                          + b(a - b) e^{-2at}) / ((a - b)(2a - b)),

and the delay-only case is the same expression with a and b swapped. Near
the denominator zeros (equal rates, or one rate double the other) the
closed forms cancel catastrophically; inside a narrow relative tube around
those lines the kernel is evaluated by adaptive quadrature instead and the
evaluation is flagged ``near_singular``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

from .distributions import (
    DistributionModel,
    Empirical,
    Exponential,
    leg_reliability_exponential,
    leg_reliability_plugin,
    leg_reliability_quadrature,
    rates_nearly_equal,
    stieltjes_expectation,
)
from .errors import (
    EnumerationTooLarge,
    IndexOutOfRange,
    NegativeVariance,
    OutOfRangeProbability,
    ValidationError,
)
from .plan import Leg, Scenario, plan_reliability, validate_scenario

KernelMode = Literal["closed_form", "quadrature", "plugin", "auto"]
Mu11Method = Literal["factorized", "enumerate"]

ENUMERATE_MAX_LEGS = 12
NEGATIVE_VARIANCE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class OmegaPair:
    """Per-family sets of legs whose indices coincide between two realizations."""

    omega1: frozenset[int]
    omega2: frozenset[int]


@dataclass(frozen=True)
class MomentSet:
    """First, second, and mixed moments of the fit indicator."""

    mu: float
    mu2: float
    mu11: float

    @classmethod
    def from_theta(cls, theta: float, mu11: float) -> "MomentSet":
        return cls(mu=theta, mu2=theta, mu11=mu11)


@dataclass(frozen=True)
class KernelEvaluation:
    """One kernel value plus how it was obtained."""

    value: float
    method: str
    near_singular: bool = False


@dataclass(frozen=True)
class LegKernels:
    """The four coincidence-case kernels of one leg."""

    both: KernelEvaluation
    neither: KernelEvaluation
    service_only: KernelEvaluation
    delay_only: KernelEvaluation

    def value_for(self, in_omega1: bool, in_omega2: bool) -> float:
        if in_omega1 and in_omega2:
            return self.both.value
        if in_omega1:
            return self.delay_only.value
        if in_omega2:
            return self.service_only.value
        return self.neither.value


@dataclass(frozen=True)
class VarianceReport:
    """Estimator variance with every intermediate needed to audit it."""

    theta: float
    mu11: float
    r: int
    variance: float
    kernel_mode: str | None = None
    method: str | None = None
    per_leg_h: tuple[LegKernels, ...] = ()

    @property
    def mu2(self) -> float:
        return self.theta


def omega_probability(omega: Iterable[int], sizes: Sequence[int]) -> float:
    """Probability that exactly the legs in omega re-extract the same element."""
    members = frozenset(omega)
    k = len(sizes)
    for i in members:
        if not 0 <= i < k:
            raise IndexOutOfRange(f"leg index {i} outside 0..{k - 1}")
    p = 1.0
    for i, n in enumerate(sizes):
        if n < 1:
            raise ValidationError(f"sample size {n!r} must be >= 1", leg=i)
        p *= 1.0 / n if i in members else 1.0 - 1.0 / n
    return p


def pair_probability(
    pair: OmegaPair, sizes_x: Sequence[int], sizes_y: Sequence[int]
) -> float:
    """Joint probability of a delay-side and a service-side coincidence pattern."""
    return omega_probability(pair.omega1, sizes_x) * omega_probability(
        pair.omega2, sizes_y
    )


def _clamp(p: float) -> float:
    return min(1.0, max(0.0, p))


def _closed_form_one_sided(a: float, b: float, t: float) -> float:
    """E[F(t - Y)**2] for X ~ Exp(a), Y ~ Exp(b); caller keeps clear of tubes."""
    num = (
        2.0 * a * a * math.exp(-b * t)
        - 2.0 * b * (2.0 * a - b) * math.exp(-a * t)
        + b * (a - b) * math.exp(-2.0 * a * t)
    )
    return 1.0 - num / ((a - b) * (2.0 * a - b))


def _leg_models(leg: Leg) -> tuple[DistributionModel, DistributionModel]:
    """Per-side delay and service models, preferring rates over samples."""
    if leg.rates is not None:
        return Exponential(leg.rates.delay_rate), Exponential(leg.rates.service_rate)
    return Empirical(leg.samples.delays), Empirical(leg.samples.services)


def _squared_cdf_expectation(
    F: DistributionModel, G: DistributionModel, t: float
) -> float:
    """E[F(t - Y)**2] with Y ~ G; quadrature or exact sum per the G model."""
    if isinstance(F, Empirical):
        steps = tuple(t - v for v in F.values if 0.0 < t - v < t)
    else:
        steps = ()
    return _clamp(
        stieltjes_expectation(lambda x: F.cdf(t - x) ** 2, G, t, breakpoints=steps)
    )


def _resolve_mode(leg: Leg, mode: KernelMode, index: int) -> str:
    if mode == "auto":
        return "closed_form" if leg.rates is not None else "plugin"
    if mode == "closed_form" and leg.rates is None:
        raise ValidationError("closed_form kernels need exponential rates", leg=index)
    if mode == "plugin" and leg.samples is None:
        raise ValidationError("plugin kernels need samples", leg=index)
    return mode


def leg_kernels(leg: Leg, t: float, mode: KernelMode, index: int = 0) -> LegKernels:
    """Evaluate all four coincidence-case kernels for one leg at slack t."""
    resolved = _resolve_mode(leg, mode, index)

    if resolved == "closed_form":
        a, b = leg.rates.delay_rate, leg.rates.service_rate
        F, G = Exponential(a), Exponential(b)
        in_tube = rates_nearly_equal(a, b)
        r_method = "erlang_limit" if in_tube else "closed_form"
        r_value = leg_reliability_exponential(leg.rates, t)
        both = KernelEvaluation(r_value, r_method, in_tube)
        neither = KernelEvaluation(_clamp(r_value * r_value), r_method, in_tube)
        if in_tube or rates_nearly_equal(2.0 * a, b):
            service_only = KernelEvaluation(
                _squared_cdf_expectation(F, G, t), "quadrature", True
            )
        else:
            service_only = KernelEvaluation(
                _clamp(_closed_form_one_sided(a, b, t)), "closed_form"
            )
        if in_tube or rates_nearly_equal(a, 2.0 * b):
            delay_only = KernelEvaluation(
                _squared_cdf_expectation(G, F, t), "quadrature", True
            )
        else:
            delay_only = KernelEvaluation(
                _clamp(_closed_form_one_sided(b, a, t)), "closed_form"
            )
        return LegKernels(both, neither, service_only, delay_only)

    if resolved == "plugin":
        F, G = Empirical(leg.samples.delays), Empirical(leg.samples.services)
        r_value = leg_reliability_plugin(leg.samples, t)
        return LegKernels(
            both=KernelEvaluation(r_value, "plugin"),
            neither=KernelEvaluation(_clamp(r_value * r_value), "plugin"),
            service_only=KernelEvaluation(_squared_cdf_expectation(F, G, t), "plugin"),
            delay_only=KernelEvaluation(_squared_cdf_expectation(G, F, t), "plugin"),
        )

    F, G = _leg_models(leg)
    r_value = leg_reliability_quadrature(F, G, t)
    return LegKernels(
        both=KernelEvaluation(r_value, "quadrature"),
        neither=KernelEvaluation(_clamp(r_value * r_value), "quadrature"),
        service_only=KernelEvaluation(_squared_cdf_expectation(F, G, t), "quadrature"),
        delay_only=KernelEvaluation(_squared_cdf_expectation(G, F, t), "quadrature"),
    )


def h_factor(
    in_omega1: bool, in_omega2: bool, leg: Leg, t: float, mode: KernelMode
) -> float:
    """Kernel value for one leg under the given coincidence membership."""
    return leg_kernels(leg, t, mode).value_for(in_omega1, in_omega2)


def scenario_kernels(scenario: Scenario, mode: KernelMode) -> tuple[LegKernels, ...]:
    """Kernels for every leg of a validated scenario."""
    validate_scenario(scenario)
    return tuple(
        leg_kernels(leg, t, mode, index=i)
        for i, (leg, t) in enumerate(zip(scenario.legs, scenario.plan.intervals))
    )


def conditional_mixed_moment(
    pair: OmegaPair, scenario: Scenario, mode: KernelMode = "auto"
) -> float:
    """Mixed moment conditioned on a coincidence pattern: product of kernels."""
    kernels = scenario_kernels(scenario, mode)
    k = len(kernels)
    for i in pair.omega1 | pair.omega2:
        if not 0 <= i < k:
            raise IndexOutOfRange(f"leg index {i} outside 0..{k - 1}")
    product = 1.0
    for i, kern in enumerate(kernels):
        product *= kern.value_for(i in pair.omega1, i in pair.omega2)
    return product


def _sizes_for(
    scenario: Scenario,
    sizes_x: Sequence[int] | None,
    sizes_y: Sequence[int] | None,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    k = scenario.plan.k
    if sizes_x is None or sizes_y is None:
        derived_x, derived_y = [], []
        for i, leg in enumerate(scenario.legs):
            if leg.samples is None:
                raise ValidationError(
                    "sample sizes required when a leg carries no samples", leg=i
                )
            derived_x.append(leg.samples.n_delays)
            derived_y.append(leg.samples.n_services)
        sizes_x = sizes_x if sizes_x is not None else derived_x
        sizes_y = sizes_y if sizes_y is not None else derived_y
    if len(sizes_x) != k or len(sizes_y) != k:
        raise ValidationError(
            f"expected {k} sizes per family, got {len(sizes_x)} and {len(sizes_y)}"
        )
    for i, (nx, ny) in enumerate(zip(sizes_x, sizes_y)):
        if nx < 1 or ny < 1:
            raise ValidationError(f"sample sizes ({nx}, {ny}) must be >= 1", leg=i)
    return tuple(int(n) for n in sizes_x), tuple(int(n) for n in sizes_y)


def _mu11_factorized(
    kernels: Sequence[LegKernels], sizes_x: Sequence[int], sizes_y: Sequence[int]
) -> float:
    product = 1.0
    for kern, nx, ny in zip(kernels, sizes_x, sizes_y):
        px, py = 1.0 / nx, 1.0 / ny
        product *= (
            px * py * kern.both.value
            + (1.0 - px) * (1.0 - py) * kern.neither.value
            + (1.0 - px) * py * kern.service_only.value
            + px * (1.0 - py) * kern.delay_only.value
        )
    return product


def _mu11_enumerated(
    kernels: Sequence[LegKernels], sizes_x: Sequence[int], sizes_y: Sequence[int]
) -> float:
    k = len(kernels)
    if k > ENUMERATE_MAX_LEGS:
        raise EnumerationTooLarge(
            f"{4 ** k} coincidence patterns for k={k}; enumerate needs k <= "
            f"{ENUMERATE_MAX_LEGS}"
        )
    p1 = [omega_probability((i for i in range(k) if m >> i & 1), sizes_x)
          for m in range(1 << k)]
    p2 = [omega_probability((i for i in range(k) if m >> i & 1), sizes_y)
          for m in range(1 << k)]
    # Ascending (mask1, mask2) order keeps the summation bit-stable.
    total = 0.0
    for m1 in range(1 << k):
        for m2 in range(1 << k):
            term = p1[m1] * p2[m2]
            if term == 0.0:
                continue
            for i, kern in enumerate(kernels):
                term *= kern.value_for(bool(m1 >> i & 1), bool(m2 >> i & 1))
            total += term
    return total


def mixed_moment_mu11(
    scenario: Scenario,
    sizes_x: Sequence[int] | None = None,
    sizes_y: Sequence[int] | None = None,
    *,
    mode: KernelMode = "auto",
    method: Mu11Method = "factorized",
) -> float:
    """Mixed moment of the fit indicator over two distinct realizations.

    ``factorized`` regroups the pattern sum into one product over legs;
    ``enumerate`` performs the literal 4**k-term sum. The two agree to
    floating rounding and the latter is retained as an audit path.
    """
    sizes_x, sizes_y = _sizes_for(scenario, sizes_x, sizes_y)
    kernels = scenario_kernels(scenario, mode)
    if method == "factorized":
        return _mu11_factorized(kernels, sizes_x, sizes_y)
    if method == "enumerate":
        return _mu11_enumerated(kernels, sizes_x, sizes_y)
    raise ValidationError(f"unknown mu11 method {method!r}")


def estimator_variance(
    theta: float,
    mu11: float,
    r: int,
    *,
    kernel_mode: str | None = None,
    method: str | None = None,
    per_leg_h: tuple[LegKernels, ...] = (),
) -> VarianceReport:
    """Variance of the r-realization resampling estimator.

    Negative results within rounding tolerance clamp to zero; anything more
    negative signals inconsistent inputs and raises NegativeVariance.
    """
    if not 0.0 <= theta <= 1.0:
        raise OutOfRangeProbability(f"theta {theta!r}")
    if not 0.0 <= mu11 <= 1.0:
        raise OutOfRangeProbability(f"mu11 {mu11!r}")
    if r < 1:
        raise ValidationError(f"realization count {r!r} must be >= 1")
    variance = theta / r + (r - 1) / r * mu11 - theta * theta
    if variance < 0.0:
        if variance < -NEGATIVE_VARIANCE_TOLERANCE:
            raise NegativeVariance(
                f"variance {variance!r} from theta={theta!r}, mu11={mu11!r}, r={r}"
            )
        variance = 0.0
    return VarianceReport(
        theta=theta,
        mu11=mu11,
        r=r,
        variance=variance,
        kernel_mode=kernel_mode,
        method=method,
        per_leg_h=per_leg_h,
    )


def variance_pipeline(
    scenario: Scenario,
    r: int,
    *,
    mode: KernelMode = "auto",
    method: Mu11Method = "factorized",
    sizes_x: Sequence[int] | None = None,
    sizes_y: Sequence[int] | None = None,
) -> VarianceReport:
    """End-to-end variance: kernels, theta, mu11, then the variance formula."""
    sizes_x, sizes_y = _sizes_for(scenario, sizes_x, sizes_y)
    kernels = scenario_kernels(scenario, mode)
    theta = plan_reliability([kern.both.value for kern in kernels])
    if method == "factorized":
        mu11 = _mu11_factorized(kernels, sizes_x, sizes_y)
    elif method == "enumerate":
        mu11 = _mu11_enumerated(kernels, sizes_x, sizes_y)
    else:
        raise ValidationError(f"unknown mu11 method {method!r}")
    return estimator_variance(
        theta,
        mu11,
        r,
        kernel_mode=mode,
        method=method,
        per_leg_h=kernels,
    )
