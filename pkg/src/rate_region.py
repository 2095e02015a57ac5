"""This module evaluates the eight rate terms and the achievable rate polytope."""

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence, cast

import numpy as np
import scipy.integrate

from .channel_model import (
    ChannelSpec,
    FloatArray,
    Frequency,
    Power,
    Receiver,
    noise_psd,
    transfer_function,
)
from .errors import (
    BudgetViolated,
    ConditionNotVerified,
    DimensionMismatch,
    InfiniteRate,
    InvalidAllocation,
)
from .spectral import BlockLength, SubchannelSet, mirror_index

Bits = float
Weights = tuple[float, float, float]
ProfileFn = Callable[[FloatArray], FloatArray]

TERM_COUNT = 8
# Terms 1, 3, 5, 7 are seen by receiver 1 and terms 2, 4, 6, 8 by receiver 2
TERM_RECEIVERS: tuple[Receiver, ...] = (1, 2, 1, 2, 1, 2, 1, 2)

BUDGET_SLACK = 1e-9
INTEGRAL_BUDGET_SLACK = 1e-6
ACHIEVABILITY_SLACK = 1e-12
TIE_TOLERANCE = 1e-12
DOMINANCE_TOLERANCE = 1e-12
SYMMETRY_TOLERANCE = 1e-12
DEFAULT_QUADRATURE_POINTS = 4096

_LOG2 = math.log(2.0)


def _as_profile(values: Sequence[float] | FloatArray, name: str) -> FloatArray:
    """A finite float vector, or InvalidAllocation."""
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise InvalidAllocation(f"{name}: holds a non-finite value")
    return arr


@dataclass(frozen=True)
class Allocation:
    """Per-frequency powers P_q(w_k) and common-message fractions a_q(w_k)."""

    n: BlockLength
    p1: FloatArray
    p2: FloatArray
    a1: FloatArray
    a2: FloatArray

    def __post_init__(self) -> None:
        mirror = mirror_index(self.n)
        for name in ("p1", "p2", "a1", "a2"):
            arr = _as_profile(getattr(self, name), name)
            if arr.size != self.n:
                raise InvalidAllocation(
                    f"{name}: has {arr.size} entries, expected {self.n}"
                )
            if name.startswith("a"):
                arr = np.clip(arr, 0.0, 1.0)
            elif np.any(arr < 0):
                raise InvalidAllocation(f"{name}: powers must be nonnegative")

            # P(w_k) = P(w_{n-k}) up to round-off
            slack = SYMMETRY_TOLERANCE * np.maximum(np.abs(arr), 1.0)
            asym = np.flatnonzero(np.abs(arr - arr[mirror]) > slack)
            if asym.size:
                raise InvalidAllocation(
                    f"{name}: not symmetric at k={int(asym[0])} "
                    f"and k={self.n - int(asym[0])}"
                )
            object.__setattr__(self, name, 0.5 * (arr + arr[mirror]))

    @classmethod
    def flat(
        cls,
        n: BlockLength,
        p1: Power,
        p2: Power,
        a1: float = 0.0,
        a2: float = 0.0,
    ) -> "Allocation":
        """Frequency-flat allocation spending the whole budgets."""
        return cls(
            n,
            np.full(n, p1, dtype=np.float64),
            np.full(n, p2, dtype=np.float64),
            np.full(n, a1, dtype=np.float64),
            np.full(n, a2, dtype=np.float64),
        )

    @property
    def average_power(self) -> tuple[Power, Power]:
        """(1/n) sum_k P_q(w_k) for both users."""
        return float(np.mean(self.p1)), float(np.mean(self.p2))

    def check_budget(self, p1: Power, p2: Power) -> None:
        """Raise if the allocation spends more than (p1, p2)."""
        for name, spent, budget in zip(("p1", "p2"), self.average_power, (p1, p2)):
            if spent > budget + BUDGET_SLACK:
                raise BudgetViolated(f"{name}: spends {spent} of a {budget} budget")


@dataclass(frozen=True)
class SpectralProfile:
    """Even allocation functions P_q(w) and a_q(w) on the continuous spectrum."""

    p1: ProfileFn
    p2: ProfileFn
    a1: ProfileFn = field(default=lambda w: np.zeros_like(w))
    a2: ProfileFn = field(default=lambda w: np.zeros_like(w))

    @classmethod
    def flat(
        cls, p1: Power, p2: Power, a1: float = 0.0, a2: float = 0.0
    ) -> "SpectralProfile":
        """Constant profiles."""
        return cls(
            lambda w: np.full_like(w, p1),
            lambda w: np.full_like(w, p2),
            lambda w: np.full_like(w, a1),
            lambda w: np.full_like(w, a2),
        )

    @classmethod
    def from_allocation(cls, alloc: Allocation) -> "SpectralProfile":
        """Piecewise-constant profiles holding each bin's value around w_k."""

        def hold(values: FloatArray) -> ProfileFn:
            def fn(w: FloatArray) -> FloatArray:
                idx = np.rint(np.asarray(w) * alloc.n / (2 * np.pi)).astype(int)
                idx %= alloc.n
                return cast(FloatArray, values[idx])

            return fn

        return cls(hold(alloc.p1), hold(alloc.p2), hold(alloc.a1), hold(alloc.a2))

    def evaluate(
        self, omega: FloatArray
    ) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
        """Evaluate (P1, P2, a1, a2) on a frequency grid."""
        omega = np.asarray(omega, dtype=np.float64)
        p1, p2, a1, a2 = (
            np.broadcast_to(np.asarray(fn(omega), dtype=np.float64), omega.shape)
            for fn in (self.p1, self.p2, self.a1, self.a2)
        )
        if np.any(p1 < 0) or np.any(p2 < 0):
            raise InvalidAllocation("power profiles must be nonnegative")
        return p1, p2, np.clip(a1, 0.0, 1.0), np.clip(a2, 0.0, 1.0)

    def sample(self, n: BlockLength) -> Allocation:
        """Sample at w_k = 2 pi k / n, mirroring the upper half onto the lower."""
        half = 2 * np.pi * np.arange(n // 2 + 1) / n
        values = self.evaluate(half)
        mirror = mirror_index(n)
        return Allocation(n, *(v[mirror] for v in values))


@dataclass(frozen=True)
class RateBounds:
    """The eight rate terms T_1..T_8 (or their integrals), in bits per use."""

    t: tuple[Bits, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", tuple(float(v) for v in self.t))
        if len(self.t) != TERM_COUNT:
            raise DimensionMismatch(
                f"expected {TERM_COUNT} rate terms, got {len(self.t)}"
            )

    def term(self, index: int) -> Bits:
        """The 1-based term T_index."""
        return self.t[index - 1]

    @property
    def binding(self) -> tuple[Receiver, Receiver, Receiver, Receiver]:
        """Receiver attaining each min-pair; ties go to receiver 1."""
        return cast(
            tuple[Receiver, Receiver, Receiver, Receiver],
            tuple(
                1 if self.t[i] <= self.t[i + 1] else 2 for i in range(0, TERM_COUNT, 2)
            ),
        )


@dataclass(frozen=True)
class RatePoint:
    """A rate triple (R0, R1, R2) in bits per channel use."""

    r0: Bits
    r1: Bits
    r2: Bits

    def __post_init__(self) -> None:
        for name in ("r0", "r1", "r2"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def as_tuple(self) -> tuple[Bits, Bits, Bits]:
        """The point as a plain tuple."""
        return self.r0, self.r1, self.r2

    def weighted(self, weights: Weights) -> Bits:
        """mu0 R0 + mu1 R1 + mu2 R2."""
        return weights[0] * self.r0 + weights[1] * self.r1 + weights[2] * self.r2


@dataclass(frozen=True)
class RegionConstraints:
    """R1 <= r1_max, R2 <= r2_max, R1 + R2 <= sum_max, R0 + R1 + R2 <= total_max."""

    r1_max: Bits
    r2_max: Bits
    sum_max: Bits
    total_max: Bits
    binding: tuple[Receiver, Receiver, Receiver, Receiver] = (1, 1, 1, 1)

    def as_tuple(self) -> tuple[Bits, Bits, Bits, Bits]:
        """(a, b, c, d)."""
        return self.r1_max, self.r2_max, self.sum_max, self.total_max


@dataclass(frozen=True)
class StrongInterferenceVerdict:
    """Outcome of the pointwise strong interference check."""

    holds_pointwise: bool
    violated_at: tuple[Frequency, ...]
    all_equal: bool = False


def term_numerators(
    gains: tuple[FloatArray, ...],
    cross: tuple[FloatArray, FloatArray],
    p1: FloatArray,
    p2: FloatArray,
    a1: FloatArray,
    a2: FloatArray,
) -> FloatArray:
    """Received signal powers of the eight terms (before dividing by the noise)."""
    g11, g12, g21, g22 = gains
    private1 = (1.0 - a1) * p1
    private2 = (1.0 - a2) * p2
    common = np.sqrt(a1 * a2 * p1 * p2)
    return np.maximum(
        np.stack(
            [
                private1 * g11,
                private1 * g12,
                private2 * g21,
                private2 * g22,
                private1 * g11 + private2 * g21,
                private1 * g12 + private2 * g22,
                p1 * g11 + p2 * g21 + common * cross[0],
                p1 * g12 + p2 * g22 + common * cross[1],
            ]
        ),
        0.0,
    )


def sum_log_terms(snr: FloatArray, n: BlockLength) -> FloatArray:
    """(1/2n) sum_k log2(1 + snr_k) per row.

    numpy's pairwise summation over a contiguous row has a fixed order, so the
    result is reproducible bit for bit.
    """
    return cast(FloatArray, np.sum(np.log1p(snr), axis=-1) / (2 * n * _LOG2))


def rate_terms_discrete(sub: SubchannelSet, alloc: Allocation) -> RateBounds:
    """Evaluate T_1..T_8 over the full DFT index set."""
    if alloc.n != sub.n:
        raise DimensionMismatch(
            f"allocation has n={alloc.n}, sub-channels have n={sub.n}"
        )

    gains = tuple(
        np.abs(sub.gain(link)) ** 2 for link in ("h11", "h12", "h21", "h22")
    )
    cross = (
        2 * np.real(sub.h11 * np.conj(sub.h21)),
        2 * np.real(sub.h12 * np.conj(sub.h22)),
    )
    numerators = term_numerators(gains, cross, alloc.p1, alloc.p2, alloc.a1, alloc.a2)
    noise = np.stack([sub.noise(receiver) for receiver in TERM_RECEIVERS])

    silent = noise <= 0
    blown = silent & (numerators > 0)
    if blown.any():
        term, k = (int(i[0]) for i in np.nonzero(blown))
        raise InfiniteRate(
            f"T{term + 1}: sub-channel k={k} is noiseless "
            f"but receives power {numerators[term, k]}"
        )

    snr = np.divide(numerators, noise, out=np.zeros_like(numerators), where=~silent)
    return RateBounds(tuple(sum_log_terms(snr, sub.n)))


def rate_terms_integral(
    spec: ChannelSpec,
    profile: SpectralProfile,
    quadrature_points: int = DEFAULT_QUADRATURE_POINTS,
) -> RateBounds:
    """Evaluate the integral terms by the composite trapezoid rule over [-pi, pi)."""
    if quadrature_points < 1:
        raise ValueError("quadrature_points must be positive")

    omega = -np.pi + 2 * np.pi * np.arange(quadrature_points) / quadrature_points
    closed = np.append(omega, np.pi)

    def integrate(values: FloatArray) -> FloatArray:
        # The integrands are 2 pi periodic, so the closing sample repeats the first
        wrapped = np.concatenate([values, values[..., :1]], axis=-1)
        return cast(FloatArray, scipy.integrate.trapezoid(wrapped, closed, axis=-1))

    p1, p2, a1, a2 = profile.evaluate(omega)
    for name, power, budget in (("p1", p1, spec.p1), ("p2", p2, spec.p2)):
        spent = float(integrate(power)) / (2 * np.pi)
        if spent > budget * (1 + INTEGRAL_BUDGET_SLACK) + BUDGET_SLACK:
            raise BudgetViolated(f"{name}: profile spends {spent} of a {budget} budget")

    h = {
        link: transfer_function(spec.link(link), omega)
        for link in ("h11", "h12", "h21", "h22")
    }
    gains = tuple(np.abs(h[link]) ** 2 for link in ("h11", "h12", "h21", "h22"))
    cross = (
        2 * np.real(h["h11"] * np.conj(h["h21"])),
        2 * np.real(h["h12"] * np.conj(h["h22"])),
    )
    numerators = term_numerators(gains, cross, p1, p2, a1, a2)
    psd = {1: noise_psd(spec.noise1, omega), 2: noise_psd(spec.noise2, omega)}
    noise = np.stack([psd[receiver] for receiver in TERM_RECEIVERS])

    silent = noise <= 0
    if np.any(silent & (numerators > 0)):
        raise InfiniteRate("a spectral null of the noise receives positive power")

    snr = np.divide(numerators, noise, out=np.zeros_like(numerators), where=~silent)
    terms = integrate(np.log1p(snr) / _LOG2) / (4 * np.pi)
    return RateBounds(tuple(terms))


def region_constraints(bounds: RateBounds) -> RegionConstraints:
    """Collapse the eight terms into the four polytope bounds."""
    t = bounds.t
    return RegionConstraints(
        min(t[0], t[1]),
        min(t[2], t[3]),
        min(t[4], t[5]),
        min(t[6], t[7]),
        bounds.binding,
    )


def _constraints(bounds: RateBounds | RegionConstraints) -> RegionConstraints:
    """Accept either terms or ready-made polytope bounds."""
    if isinstance(bounds, RateBounds):
        return region_constraints(bounds)
    return bounds


def is_achievable(bounds: RateBounds | RegionConstraints, point: RatePoint) -> bool:
    """Whether a rate triple lies in the polytope of one allocation."""
    a, b, c, d = _constraints(bounds).as_tuple()
    r0, r1, r2 = point.as_tuple()
    slack = ACHIEVABILITY_SLACK
    return (
        min(r0, r1, r2) >= -slack
        and r1 <= a + slack
        and r2 <= b + slack
        and r1 + r2 <= c + slack
        and r0 + r1 + r2 <= d + slack
    )


def _same_point(lhs: RatePoint, rhs: RatePoint) -> bool:
    """Equal coordinates up to the tie tolerance."""
    pairs = zip(lhs.as_tuple(), rhs.as_tuple())
    return all(abs(x - y) <= TIE_TOLERANCE for x, y in pairs)


def region_vertices(bounds: RateBounds | RegionConstraints) -> list[RatePoint]:
    """Vertices of the polytope.

    The (R1, R2) shadow is the pentagon cut by R1 <= a', R2 <= b', R1 + R2 <= s';
    every vertex sits on R0 = 0 or on R0 = d - R1 - R2 above one of its corners.
    """
    a, b, c, d = (max(v, 0.0) for v in _constraints(bounds).as_tuple())
    s = min(c, d)
    a_eff = min(a, s)
    b_eff = min(b, s)
    s_eff = min(s, a_eff + b_eff)
    corners = [
        (0.0, 0.0),
        (a_eff, 0.0),
        (a_eff, s_eff - a_eff),
        (s_eff - b_eff, b_eff),
        (0.0, b_eff),
    ]

    vertices: list[RatePoint] = []
    for r1, r2 in corners:
        for r0 in (max(d - r1 - r2, 0.0), 0.0):
            candidate = RatePoint(r0, r1, r2)
            if not any(_same_point(candidate, v) for v in vertices):
                vertices.append(candidate)
    return vertices


def check_weights(weights: Sequence[float]) -> Weights:
    """Validate a weight triple (mu0, mu1, mu2): finite, nonnegative, not all zero."""
    if len(weights) != 3:
        raise ValueError(f"weights must be a triple, got {len(weights)} values")
    mu = cast(Weights, tuple(float(w) for w in weights))
    if any(not math.isfinite(w) or w < 0 for w in mu) or not any(mu):
        raise ValueError(f"weights must be nonnegative and not all zero, got {mu}")
    return mu


def max_weighted_rate(
    bounds: RateBounds | RegionConstraints, weights: Sequence[float]
) -> RatePoint:
    """Maximise mu . R over the polytope by vertex enumeration.

    Ties within 1e-12 go to the lexicographically largest (R0, R1, R2).
    """
    mu = check_weights(weights)
    vertices = region_vertices(bounds)
    best_value = max(vertex.weighted(mu) for vertex in vertices)
    optimal = [v for v in vertices if v.weighted(mu) >= best_value - TIE_TOLERANCE]
    return max(optimal, key=RatePoint.as_tuple)


def _dominated(lhs: FloatArray, rhs: FloatArray) -> FloatArray:
    """lhs <= rhs up to the dominance tolerance."""
    return cast(FloatArray, lhs <= rhs + DOMINANCE_TOLERANCE * np.maximum(lhs, rhs))


def _equal(lhs: FloatArray, rhs: FloatArray) -> FloatArray:
    """lhs == rhs up to the dominance tolerance."""
    slack = DOMINANCE_TOLERANCE * np.maximum(lhs, rhs)
    return cast(FloatArray, np.abs(lhs - rhs) <= slack)


def strong_interference_check(sub: SubchannelSet) -> StrongInterferenceVerdict:
    """Check |H11|^2/N1 <= |H12|^2/N2 and |H22|^2/N2 <= |H21|^2/N1 at every w_k.

    Both sides are cross-multiplied by the noise levels so noiseless bins need
    no division.
    """
    g11 = np.abs(sub.h11) ** 2 * sub.noise2
    g12 = np.abs(sub.h12) ** 2 * sub.noise1
    g22 = np.abs(sub.h22) ** 2 * sub.noise1
    g21 = np.abs(sub.h21) ** 2 * sub.noise2

    holds = _dominated(g11, g12) & _dominated(g22, g21)
    violated = tuple(float(w) for w in sub.frequencies[~holds])
    all_equal = bool(np.all(_equal(g11, g12) & _equal(g22, g21)))
    return StrongInterferenceVerdict(not violated, violated, all_equal)


def sicc_region_constraints(
    bounds: RateBounds, verdict: StrongInterferenceVerdict | None
) -> RegionConstraints:
    """Bounds of the strong interference channel: R1 <= T1, R2 <= T4."""
    if verdict is None or not verdict.holds_pointwise:
        raise ConditionNotVerified(
            "strong interference bounds need a verdict that holds pointwise"
        )

    t = bounds.t
    binding = bounds.binding
    return RegionConstraints(
        t[0],
        t[3],
        min(t[4], t[5]),
        min(t[6], t[7]),
        (1, 2, binding[2], binding[3]),
    )


def warn_if_silent(alloc: Allocation) -> None:
    """Warn when an allocation puts no power anywhere."""
    if not np.any(alloc.p1) and not np.any(alloc.p2):
        warnings.warn(
            "allocation spends no power; every rate term is 0", RuntimeWarning
        )


__all__ = [
    "Bits",
    "Weights",
    "ProfileFn",
    "TERM_COUNT",
    "TERM_RECEIVERS",
    "DEFAULT_QUADRATURE_POINTS",
    "Allocation",
    "SpectralProfile",
    "RateBounds",
    "RatePoint",
    "RegionConstraints",
    "StrongInterferenceVerdict",
    "term_numerators",
    "sum_log_terms",
    "rate_terms_discrete",
    "rate_terms_integral",
    "region_constraints",
    "is_achievable",
    "region_vertices",
    "check_weights",
    "max_weighted_rate",
    "strong_interference_check",
    "sicc_region_constraints",
    "warn_if_silent",
]
