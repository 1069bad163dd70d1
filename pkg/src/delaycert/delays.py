"""Time-varying delay families for continuous and discrete systems.

Each family exposes the delay value tau(t) (or d(k)) together with its
declared structural properties: boundedness, the delay supremum, the
asymptotic ratio limsup tau(t)/t, and the history depth

    history_depth = max(0, -inf_{0 <= t <= T0} (t - tau(t)))

which is the length of the initial-condition window.  The history depth and
the delay supremum coincide only for constant delays; both are kept.

The admissible regime is t - tau(t) -> +infinity: old state information is
eventually purged.  Proportional delays tau(t) <= alpha * t with alpha < 1
are the subclass that supports power-rate decay bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class DelayModel:
    """Base: a delay signal plus whatever structure the family declares.

    Declared attributes (None = unknown, forces sampled analysis):
      bounded            delay signal is bounded
      tau_sup            sup of the delay when bounded
      alpha_limit        limsup tau(t)/t (0 for bounded families)
      diverges           whether t - tau(t) -> +infinity is known to hold
    """

    is_discrete = False
    bounded: bool | None = None
    tau_sup: float | None = None
    alpha_limit: float | None = None
    diverges: bool | None = None

    def value(self, t: float) -> float:
        raise NotImplementedError

    def exact_history_depth(self) -> float | None:
        """Closed-form history depth when the family provides one."""
        return None


@dataclass(frozen=True)
class ConstantDelay(DelayModel):
    tau: float

    def __post_init__(self):
        if self.tau < 0.0:
            raise ValueError("delay must be nonnegative")

    bounded = True
    alpha_limit = 0.0
    diverges = True

    @property
    def tau_sup(self) -> float:
        return self.tau

    def value(self, t: float) -> float:
        return self.tau

    def exact_history_depth(self) -> float:
        return self.tau


@dataclass(frozen=True)
class SinusoidalDelay(DelayModel):
    """tau(t) = a + b * sin(t), with a >= |b| so the delay stays nonnegative."""

    a: float
    b: float

    def __post_init__(self):
        if self.a < abs(self.b):
            raise ValueError("need a >= |b| for a nonnegative delay")

    bounded = True
    alpha_limit = 0.0
    diverges = True

    @property
    def tau_sup(self) -> float:
        return self.a + abs(self.b)

    def value(self, t: float) -> float:
        return self.a + self.b * math.sin(t)

    def exact_history_depth(self) -> float | None:
        # d/dt (t - a - b sin t) = 1 - b cos t >= 0 when |b| <= 1, so the
        # minimum of t - tau(t) sits at t = 0.
        if abs(self.b) <= 1.0:
            return max(0.0, self.a)
        return None


@dataclass(frozen=True)
class PiecewiseLinearDelay(DelayModel):
    """Delay interpolated linearly through (t, tau) knots, constant outside."""

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        knots = tuple((float(t), float(tau)) for t, tau in self.knots)
        if len(knots) < 1:
            raise ValueError("need at least one knot")
        ts = [t for t, _ in knots]
        if sorted(ts) != ts or len(set(ts)) != len(ts):
            raise ValueError("knot times must be strictly increasing")
        if min(tau for _, tau in knots) < 0.0:
            raise ValueError("delay values must be nonnegative")
        object.__setattr__(self, "knots", knots)

    bounded = True
    alpha_limit = 0.0
    diverges = True

    @property
    def tau_sup(self) -> float:
        return max(tau for _, tau in self.knots)

    def value(self, t: float) -> float:
        knots = self.knots
        if t <= knots[0][0]:
            return knots[0][1]
        if t >= knots[-1][0]:
            return knots[-1][1]
        for (t0, y0), (t1, y1) in zip(knots, knots[1:]):
            if t <= t1:
                w = (t - t0) / (t1 - t0)
                return y0 + w * (y1 - y0)
        return knots[-1][1]  # unreachable

    def exact_history_depth(self) -> float:
        # t - tau(t) is piecewise linear, so its minimum over [0, last knot]
        # is attained at a knot or at t = 0; beyond the last knot it grows.
        cands = [0.0 - self.value(0.0)]
        cands += [t - tau for t, tau in self.knots if t >= 0.0]
        return max(0.0, -min(cands))


@dataclass(frozen=True)
class ProportionalDelay(DelayModel):
    """tau(t) = alpha * t with 0 <= alpha < 1; unbounded, ratio exactly alpha."""

    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")

    bounded = False
    tau_sup = None
    diverges = True

    @property
    def alpha_limit(self) -> float:
        return self.alpha

    def value(self, t: float) -> float:
        return self.alpha * t

    def exact_history_depth(self) -> float:
        return 0.0


@dataclass(frozen=True)
class LogLagDelay(DelayModel):
    """tau(t) = t - ln(t + 1): the delayed argument advances only like ln t.

    t - tau(t) still diverges, but tau(t)/t -> 1, so no proportional ratio
    alpha < 1 exists and power-rate bounds do not apply.
    """

    bounded = False
    tau_sup = None
    alpha_limit = 1.0
    diverges = True

    def value(self, t: float) -> float:
        return t - math.log1p(t)

    def exact_history_depth(self) -> float:
        return 0.0


@dataclass(frozen=True)
class CustomDelay(DelayModel):
    """Arbitrary delay signal with no declared structure (sampled analysis)."""

    fn: Callable[[float], float]

    def value(self, t: float) -> float:
        return self.fn(t)


# -- discrete families -------------------------------------------------------


@dataclass(frozen=True)
class ConstantStepDelay(DelayModel):
    d: int

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("delay must be nonnegative")
        object.__setattr__(self, "d", int(self.d))

    is_discrete = True
    bounded = True
    alpha_limit = 0.0
    diverges = True

    @property
    def tau_sup(self) -> float:
        return float(self.d)

    def value(self, k: int) -> int:
        return self.d

    def exact_history_depth(self) -> int:
        return self.d


@dataclass(frozen=True)
class AlternatingParityDelay(DelayModel):
    """d(k) = (1 - (-1)**k) / 2: zero on even steps, one on odd steps."""

    is_discrete = True
    bounded = True
    tau_sup = 1.0
    alpha_limit = 0.0
    diverges = True

    def value(self, k: int) -> int:
        return k % 2

    def exact_history_depth(self) -> int:
        # k - d(k) is 0, 0, 2, 2, 4, ... so the infimum is 0.
        return 0


@dataclass(frozen=True)
class ProportionalStepDelay(DelayModel):
    """d(k) = floor(alpha * k) with 0 <= alpha < 1."""

    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")

    is_discrete = True
    bounded = False
    tau_sup = None
    diverges = True

    @property
    def alpha_limit(self) -> float:
        return self.alpha

    def value(self, k: int) -> int:
        return int(math.floor(self.alpha * k))

    def exact_history_depth(self) -> int:
        return 0


def history_depth(delay: DelayModel, probe_horizon: float = 200.0) -> float:
    """Length of the initial-history window the delay reaches back into.

    Exact for the parametric families; otherwise found by grid minimization
    of t - tau(t) over [0, T0], where T0 is the last observed time with
    t - tau(t) <= 0.
    """
    exact = delay.exact_history_depth()
    if exact is not None:
        return exact
    if probe_horizon <= 0.0:
        raise ValueError("probe horizon must be positive")
    ts = np.linspace(0.0, probe_horizon, 50001)
    w = np.array([t - delay.value(t) for t in ts])
    if delay.diverges is None and w[-1] <= 0.0:
        raise ValueError(
            "delayed argument never became positive within the probe horizon; "
            "the delay violates the divergence assumption"
        )
    nonpos = np.nonzero(w <= 0.0)[0]
    if len(nonpos) == 0:
        return 0.0
    t0_idx = nonpos[-1]
    j = int(np.argmin(w[: t0_idx + 1]))
    # local refinement around the coarse minimizer
    lo = ts[max(j - 1, 0)]
    hi = ts[min(j + 1, len(ts) - 1)]
    fine = np.linspace(lo, hi, 2001)
    depth = -min(float(min(t - delay.value(t) for t in fine)), float(w[: t0_idx + 1].min()))
    return max(0.0, depth)


def as_delay_list(
    delay: DelayModel | Sequence[DelayModel], count: int
) -> tuple[DelayModel, ...]:
    """Broadcast a single delay over all delayed terms, or match one each."""
    if isinstance(delay, DelayModel):
        return (delay,) * count
    delays = tuple(delay)
    if len(delays) != count:
        raise ValueError(
            f"got {len(delays)} delay models for {count} delayed terms"
        )
    return delays
