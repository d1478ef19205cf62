"""Distribution models and per-leg reliability kernels.

A leg completes on time with probability R(t) = P(X + Y <= t) where X is the
arrival delay and Y the service time. With G the service CDF and F the delay
CDF this is the Stieltjes convolution

    R(t) = integral over [0, inf) of F(t - x) dG(x),

which this module evaluates three ways:

* ``leg_reliability_exponential`` -- closed form for exponential X and Y
  (the CDF of a two-stage hypoexponential sum), with an Erlang-2 limit when
  the two rates nearly coincide;
* ``leg_reliability_quadrature`` -- adaptive quadrature of the integral for
  any model pair, the independent cross-check for the closed forms;
* ``leg_reliability_plugin`` -- the empirical plug-in, an exact finite sum
  over all sample pairs.

Supports are nonnegative throughout: F(u) = G(u) = 0 for u < 0, so every
integral truncates to [0, t].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EmptySample, InvalidSampleValue, NegativeTime, NonpositiveRate
from .plan import ExponentialLegModel, LegSamples
from .quadrature import adaptive_quadrature

# Two rates a, b count as coincident when |a - b| <= RATE_TUBE * max(a, b).
# Wide enough to clear catastrophic cancellation in the closed forms, narrow
# enough that limit-form fallbacks stay within 1e-6 of the exact value.
RATE_TUBE = 1e-6


@dataclass(frozen=True)
class Exponential:
    """Exponential law with the given rate (inverse time)."""

    rate: float

    def __post_init__(self):
        if not math.isfinite(self.rate) or self.rate <= 0:
            raise NonpositiveRate(f"rate {self.rate!r}")

    def cdf(self, u):
        u = np.asarray(u, dtype=float)
        out = -np.expm1(-self.rate * np.maximum(u, 0.0))
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class Empirical:
    """Empirical law of a nonnegative sample; CDF is the inclusive step function."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) == 0:
            raise EmptySample("empirical sample is empty")
        for v in self.values:
            if not math.isfinite(v) or v < 0:
                raise InvalidSampleValue(f"sample value {v!r}")
        object.__setattr__(self, "values", tuple(sorted(self.values)))

    def cdf(self, u):
        u = np.asarray(u, dtype=float)
        out = np.searchsorted(self.values, u, side="right") / len(self.values)
        return out if out.ndim else float(out)


DistributionModel = Union[Exponential, Empirical]


def cdf(model: DistributionModel, u: float):
    """CDF of the model at u; vectorizes over array input."""
    return model.cdf(u)


def rates_nearly_equal(a: float, b: float, tube: float = RATE_TUBE) -> bool:
    """True when a and b fall inside the relative coincidence tube."""
    return abs(a - b) <= tube * max(abs(a), abs(b))


def _require_nonnegative_time(t: float) -> None:
    if t < 0 or not math.isfinite(t):
        raise NegativeTime(f"slack time {t!r}")


def leg_reliability_exponential(leg: ExponentialLegModel, t: float) -> float:
    """Closed-form P(X + Y <= t) for exponential delay and service laws.

    With distinct rates a (delay) and b (service):

        R(t) = 1 - (a e^{-bt} - b e^{-at}) / (a - b),

    the hypoexponential CDF. Inside the rate-coincidence tube the Erlang-2
    limit 1 - (1 + at) e^{-at} is used instead; its deviation from the exact
    value across the tube is below 1e-6.
    """
    _require_nonnegative_time(t)
    a, b = leg.delay_rate, leg.service_rate
    if rates_nearly_equal(a, b):
        value = 1.0 - (1.0 + a * t) * math.exp(-a * t)
    else:
        value = 1.0 - (a * math.exp(-b * t) - b * math.exp(-a * t)) / (a - b)
    return min(1.0, max(0.0, value))


def stieltjes_expectation(
    f, weight: DistributionModel, t: float, breakpoints: tuple[float, ...] = ()
) -> float:
    """integral over [0, t] of f(x) d(weight)(x) for a vectorized integrand f.

    Empirical weight reduces to the exact finite sum over its atoms (atoms
    beyond t contribute through f directly, so f must vanish there).
    Exponential weight goes through adaptive quadrature with the integrand
    multiplied by the exponential density; ``breakpoints`` marks interior
    steps of f so panels stay smooth.
    """
    if isinstance(weight, Empirical):
        return float(np.mean(f(np.asarray(weight.values, dtype=float))))
    rate = weight.rate

    def integrand(x: np.ndarray) -> np.ndarray:
        return f(x) * rate * np.exp(-rate * x)

    return adaptive_quadrature(integrand, 0.0, t, breakpoints=breakpoints).value


def _step_breakpoints(model: DistributionModel, t: float) -> tuple[float, ...]:
    """Interior jump locations of x -> model.cdf(t - x) on [0, t]."""
    if isinstance(model, Empirical):
        return tuple(t - v for v in model.values if 0.0 < t - v < t)
    return ()


def leg_reliability_quadrature(
    F: DistributionModel, G: DistributionModel, t: float
) -> float:
    """P(X + Y <= t) by direct evaluation of the convolution integral.

    X ~ F, Y ~ G independent with nonnegative support. Agrees with the
    closed form to the quadrature tolerance for exponential pairs, and with
    the plug-in sum exactly for empirical pairs.
    """
    _require_nonnegative_time(t)
    value = stieltjes_expectation(
        lambda x: F.cdf(t - x), G, t, breakpoints=_step_breakpoints(F, t)
    )
    return min(1.0, max(0.0, value))


def leg_reliability_plugin(samples: LegSamples, t: float) -> float:
    """Fraction of delay/service sample cross-pairs with x + y <= t."""
    _require_nonnegative_time(t)
    x = np.asarray(samples.delays, dtype=float)
    y = np.asarray(samples.services, dtype=float)
    return float(np.mean(x[:, None] + y[None, :] <= t))
