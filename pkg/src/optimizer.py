"""Search over spectral allocations for points on the boundary of the achievable region.

The weighted sum rate of one allocation is the value of a small linear program
over its polytope. Boundary points are found by maximising that value over the
allocation with a projected coordinate ascent from several starting points.
"""

import itertools
import logging
import math
from dataclasses import dataclass, replace
from typing import Sequence, cast

import numpy as np
import scipy.optimize

from .channel_model import FloatArray, Power
from .errors import InfiniteRate, LengthMismatch, ZeroChannel
from .rate_region import (
    TERM_COUNT,
    TIE_TOLERANCE,
    Allocation,
    RateBounds,
    RatePoint,
    RegionConstraints,
    Weights,
    check_weights,
    max_weighted_rate,
    rate_terms_discrete,
    sum_log_terms,
    term_numerators,
)
from .spectral import BlockLength, SubchannelSet, mirror_index

Block = str
BLOCKS: tuple[Block, ...] = ("p1", "p2", "a1", "a2")

_Ascent = tuple[dict[Block, FloatArray], float, int, bool]

MAX_HALVINGS = 30
MAX_STEP = 1e6
SQRT_FLOOR = 1e-12
LP_STEP = 1e-7
VALUE_ROUNDOFF = 1e-15
FLAT_ROUNDS = 100
EXHAUSTIVE_LIMIT = 2_000_000

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs of the boundary search."""

    multistarts: int = 16
    max_iterations: int = 2000
    rel_tolerance: float = 1e-8
    grad_tolerance: float = 1e-10
    step_init: float = 0.1
    seed: int = 0
    coarse_grid: int = 8

    def __post_init__(self) -> None:
        for name in ("multistarts", "max_iterations", "coarse_grid"):
            if getattr(self, name) < 1:
                raise ValueError(
                    f"{name} must be at least 1, got {getattr(self, name)}"
                )
        if not self.rel_tolerance > 0:
            raise ValueError(
                f"rel_tolerance must be positive, got {self.rel_tolerance}"
            )
        if not self.grad_tolerance > 0:
            raise ValueError(
                f"grad_tolerance must be positive, got {self.grad_tolerance}"
            )
        if not self.step_init > 0:
            raise ValueError(f"step_init must be positive, got {self.step_init}")


@dataclass(frozen=True)
class BoundarySample:
    """The best allocation found for one weight vector."""

    weights: Weights
    point: RatePoint
    allocation: Allocation
    bounds: RateBounds
    iterations: int
    converged: bool

    @property
    def objective(self) -> float:
        """mu . R at the reported point."""
        return self.point.weighted(self.weights)


@dataclass(frozen=True)
class WaterfillResult:
    """Single-user water-filling solution."""

    allocation: FloatArray
    capacity: float
    water_level: float


def project_power(
    raw: Sequence[float] | FloatArray, budget: Power, n: BlockLength | None = None
) -> FloatArray:
    """Euclidean projection onto symmetric nonnegative profiles with mean <= budget."""
    raw = np.asarray(raw, dtype=np.float64)
    if n is not None and raw.size != n:
        raise LengthMismatch(f"profile has {raw.size} entries, expected {n}")
    n = raw.size
    sym = 0.5 * (raw + raw[(-np.arange(n)) % n])
    clipped = np.maximum(sym, 0.0)
    total = n * budget
    if clipped.sum() <= total:
        return clipped
    if total <= 0:
        return np.zeros(n)

    # Sort-based projection onto {x >= 0, sum x = total}
    ordered = np.sort(sym)[::-1]
    excess = np.cumsum(ordered) - total
    positive = ordered - excess / np.arange(1, n + 1) > 0
    last = int(np.flatnonzero(positive)[-1])
    theta = excess[last] / (last + 1)
    return np.maximum(sym - theta, 0.0)


def waterfill_single_user(
    snr: Sequence[float] | FloatArray, budget: Power
) -> WaterfillResult:
    """Maximise (1/2n) sum_k log2(1 + P_k snr_k) with (1/n) sum_k P_k <= budget."""
    snr = np.asarray(snr, dtype=np.float64)
    if not np.all(np.isfinite(snr)) or np.any(snr < 0):
        raise ValueError("sub-channel SNRs must be finite and nonnegative")
    if not math.isfinite(budget) or budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")

    n = snr.size
    if budget == 0:
        return WaterfillResult(np.zeros(n), 0.0, 0.0)

    active = snr > 0
    if not active.any():
        raise ZeroChannel(
            "every sub-channel has zero gain",
            allocation=np.full(n, budget),
            capacity=0.0,
        )

    floors = 1.0 / snr[active]

    def overspend(level: float) -> float:
        return float(np.sum(np.maximum(level - floors, 0.0)) / n - budget)

    upper = n * budget / floors.size + float(floors.max())
    level = float(scipy.optimize.bisect(overspend, 0.0, upper, xtol=1e-15, maxiter=200))

    power = np.zeros(n)
    power[active] = np.maximum(level - floors, 0.0)
    capacity = float(sum_log_terms(power * snr, n))
    filled = int(np.count_nonzero(power))
    logging.debug("Water level %.6g fills %d of %d bins", level, filled, n)
    return WaterfillResult(power, capacity, level)


class _WeightedObjective:
    """mu . R* of an allocation, with its gradient per frequency bin."""

    def __init__(self, sub: SubchannelSet, weights: Weights) -> None:
        self.n = sub.n
        self.weights = weights
        self.mirror = mirror_index(sub.n)
        self.multiplicity = np.bincount(self.mirror).astype(np.float64)

        inverse = {}
        for receiver, links in ((1, ("h11", "h21")), (2, ("h12", "h22"))):
            noise = sub.noise(receiver)
            silent = noise <= 0
            for link in links:
                if np.any(silent & (np.abs(sub.gain(link)) > 0)):
                    raise InfiniteRate(f"{link}: reaches a noiseless sub-channel")
            inverse[receiver] = np.divide(
                1.0, noise, out=np.zeros(sub.n), where=~silent
            )

        self.gains = (
            np.abs(sub.h11) ** 2 * inverse[1],
            np.abs(sub.h12) ** 2 * inverse[2],
            np.abs(sub.h21) ** 2 * inverse[1],
            np.abs(sub.h22) ** 2 * inverse[2],
        )
        self.cross = (
            2 * np.real(sub.h11 * np.conj(sub.h21)) * inverse[1],
            2 * np.real(sub.h12 * np.conj(sub.h22)) * inverse[2],
        )

    def full(self, half: FloatArray) -> FloatArray:
        """Mirror a half-spectrum vector onto all n bins."""
        return half[self.mirror]

    def fold(self, values: FloatArray) -> FloatArray:
        """Average a per-bin vector over each mirror pair."""
        return np.bincount(self.mirror, weights=values) / self.multiplicity

    def snr(self, state: dict[Block, FloatArray]) -> FloatArray:
        """Numerators of the eight terms per bin."""
        p1, p2, a1, a2 = (self.full(state[name]) for name in BLOCKS)
        return term_numerators(self.gains, self.cross, p1, p2, a1, a2)

    def terms(self, state: dict[Block, FloatArray]) -> FloatArray:
        """The eight rate terms of a state."""
        return sum_log_terms(self.snr(state), self.n)

    def value_of_terms(self, terms: FloatArray | Sequence[float]) -> float:
        """Weighted rate of the polytope spanned by eight terms."""
        t = terms
        constraints = RegionConstraints(
            min(t[0], t[1]), min(t[2], t[3]), min(t[4], t[5]), min(t[6], t[7])
        )
        return max_weighted_rate(constraints, self.weights).weighted(self.weights)

    def value(self, state: dict[Block, FloatArray]) -> float:
        """Weighted rate of a state."""
        return self.value_of_terms(self.terms(state))

    def term_sensitivity(self, terms: FloatArray) -> FloatArray:
        """dV/dT_i, by central differences of the LP value in (a, b, c, d)."""
        sensitivity = np.zeros(TERM_COUNT)
        for pair in range(TERM_COUNT // 2):
            lhs, rhs = terms[2 * pair], terms[2 * pair + 1]
            up = np.array(terms, dtype=np.float64)
            down = np.array(terms, dtype=np.float64)
            up[2 * pair : 2 * pair + 2] += LP_STEP
            down[2 * pair : 2 * pair + 2] -= LP_STEP
            rise = self.value_of_terms(up) - self.value_of_terms(down)
            slope = rise / (2 * LP_STEP)
            if abs(lhs - rhs) <= TIE_TOLERANCE:
                sensitivity[2 * pair : 2 * pair + 2] = 0.5 * slope
            elif lhs < rhs:
                sensitivity[2 * pair] = slope
            else:
                sensitivity[2 * pair + 1] = slope
        return sensitivity

    def gradient(self, state: dict[Block, FloatArray], block: Block) -> FloatArray:
        """Per-bin derivative of the value in one block, on the half spectrum."""
        snr = self.snr(state)
        lam = self.term_sensitivity(sum_log_terms(snr, self.n))
        w = lam[:, None] / ((1.0 + snr) * 2 * self.n * _LOG2)

        g11, g12, g21, g22 = self.gains
        rho1, rho2 = self.cross
        p1, p2, a1, a2 = (self.full(state[name]) for name in BLOCKS)

        def half_root(num: FloatArray, den: FloatArray) -> FloatArray:
            # d sqrt(num * den) / d den
            return np.sqrt(num) / (2 * np.sqrt(np.maximum(den, SQRT_FLOOR)))

        mixed = w[6] * rho1 + w[7] * rho2
        if block == "p1":
            own = (w[0] + w[4]) * g11 + (w[1] + w[5]) * g12
            grad = (
                (1 - a1) * own
                + w[6] * g11
                + w[7] * g12
                + mixed * half_root(a1 * a2 * p2, p1)
            )
        elif block == "p2":
            own = (w[2] + w[4]) * g21 + (w[3] + w[5]) * g22
            grad = (
                (1 - a2) * own
                + w[6] * g21
                + w[7] * g22
                + mixed * half_root(a1 * a2 * p1, p2)
            )
        elif block == "a1":
            own = (w[0] + w[4]) * g11 + (w[1] + w[5]) * g12
            grad = -p1 * own + mixed * half_root(a2 * p1 * p2, a1)
        else:
            own = (w[2] + w[4]) * g21 + (w[3] + w[5]) * g22
            grad = -p2 * own + mixed * half_root(a1 * p1 * p2, a2)
        return self.fold(grad)


def _project(
    objective: _WeightedObjective, block: Block, half: FloatArray, budget: Power
) -> FloatArray:
    """Project one half-spectrum block back onto its feasible set."""
    if block.startswith("a"):
        return np.clip(half, 0.0, 1.0)
    full = project_power(objective.full(half), budget)
    return full[: objective.n // 2 + 1]


def _residual(
    objective: _WeightedObjective,
    state: dict[Block, FloatArray],
    block: Block,
    budget: Power,
) -> tuple[FloatArray, float]:
    """Ascent direction of one block and the size of its unit projected step."""
    direction = objective.n * objective.gradient(state, block)
    moved = _project(objective, block, state[block] + direction, budget)
    return direction, float(np.max(np.abs(moved - state[block])))


def _ascend(
    objective: _WeightedObjective,
    state: dict[Block, FloatArray],
    budgets: tuple[Power, Power],
    cfg: OptimizerConfig,
) -> _Ascent:
    """Projected coordinate ascent from one starting point.

    Stops once no block has a projected step longer than grad_tolerance, when a
    round moves nothing, or after FLAT_ROUNDS rounds in a row that each gain less
    than rel_tolerance. Below round-off a step is still taken if it shrinks the
    projected step of its block.
    """
    budget = {"p1": budgets[0], "p2": budgets[1]}
    steps = {name: cfg.step_init for name in BLOCKS}
    value = objective.value(state)
    flat_rounds = 0
    gain_small = False

    for iteration in range(1, cfg.max_iterations + 1):
        round_start = value
        worst = 0.0
        moved_any = False
        for block in BLOCKS:
            limit = budget.get(block, 0.0)
            direction, residual = _residual(objective, state, block, limit)
            worst = max(worst, residual)
            if residual == 0.0:
                continue
            step = steps[block]
            for _ in range(MAX_HALVINGS):
                moved = _project(
                    objective, block, state[block] + step * direction, limit
                )
                if np.array_equal(moved, state[block]):
                    break
                candidate = {**state, block: moved}
                candidate_value = objective.value(candidate)
                accept = candidate_value > value or (
                    candidate_value >= value - VALUE_ROUNDOFF * max(abs(value), 1.0)
                    and _residual(objective, candidate, block, limit)[1] < residual
                )
                if accept:
                    state, value = candidate, candidate_value
                    steps[block] = min(2 * step, MAX_STEP)
                    moved_any = True
                    break
                step /= 2
            else:
                steps[block] = cfg.step_init

        if worst <= cfg.grad_tolerance:
            return state, value, iteration, True
        if not moved_any:
            logging.debug("Ascent stalled with projected step %.3g", worst)
            return state, value, iteration, True

        gain_small = value - round_start <= cfg.rel_tolerance * max(abs(value), 1e-12)
        flat_rounds = flat_rounds + 1 if gain_small else 0
        if flat_rounds >= FLAT_ROUNDS:
            return state, value, iteration, True

    return state, value, cfg.max_iterations, gain_small


def _half_state(
    alloc: Allocation, budgets: tuple[Power, Power]
) -> dict[Block, FloatArray]:
    """Turn a warm-start allocation into a feasible half-spectrum state."""
    half = alloc.n // 2 + 1
    state = {
        name: np.array(getattr(alloc, name)[:half], dtype=np.float64)
        for name in BLOCKS
    }
    for name, budget in zip(("p1", "p2"), budgets):
        full = project_power(getattr(alloc, name), budget)
        state[name] = full[:half]
    return state


def _sample(
    sub: SubchannelSet,
    weights: Weights,
    alloc: Allocation,
    iterations: int,
    converged: bool,
) -> BoundarySample:
    """Evaluate an allocation into a boundary sample."""
    bounds = rate_terms_discrete(sub, alloc)
    point = max_weighted_rate(bounds, weights)
    return BoundarySample(weights, point, alloc, bounds, iterations, converged)


def optimize_weighted(
    sub: SubchannelSet,
    budgets: tuple[Power, Power],
    weights: Sequence[float],
    cfg: OptimizerConfig = OptimizerConfig(),
    warm_starts: Sequence[Allocation] = (),
) -> BoundarySample:
    """Approximate max over allocations of max over the polytope of mu . R."""
    mu = check_weights(weights)
    objective = _WeightedObjective(sub, mu)
    half = sub.half_length + 1

    starts: list[dict[Block, FloatArray]] = [
        _half_state(alloc, budgets) for alloc in warm_starts
    ]
    for child in np.random.SeedSequence(cfg.seed).spawn(cfg.multistarts):
        rng = np.random.default_rng(child)
        starts.append(
            {
                "p1": np.full(half, budgets[0], dtype=np.float64),
                "p2": np.full(half, budgets[1], dtype=np.float64),
                "a1": rng.uniform(size=half),
                "a2": rng.uniform(size=half),
            }
        )

    best: _Ascent | None = None
    for index, start in enumerate(starts):
        result = _ascend(objective, start, budgets, cfg)
        logging.debug(
            "Start %d: value %.12g after %d rounds (converged: %s)",
            index,
            result[1],
            result[2],
            result[3],
        )
        if best is None or result[1] > best[1]:
            best = result

    state, value, iterations, converged = cast(_Ascent, best)
    if not converged:
        logging.warning("Boundary search for mu=%s stopped at the iteration cap", mu)

    alloc = Allocation(sub.n, *(objective.full(state[name]) for name in BLOCKS))
    logging.info("mu=%s: weighted rate %.9g", mu, value)
    return _sample(sub, mu, alloc, iterations, converged)


def _compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    """All ways to write total as an ordered sum of parts nonnegative integers."""
    res = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        edges = (-1,) + bars + (total + parts - 1,)
        res.append(tuple(edges[i + 1] - edges[i] - 1 for i in range(parts)))
    return res


def exhaustive_weighted(
    sub: SubchannelSet,
    budgets: tuple[Power, Power],
    weights: Sequence[float],
    cfg: OptimizerConfig = OptimizerConfig(),
) -> BoundarySample:
    """Grid search for small n.

    Powers spend the whole budget in coarse_grid equal quanta spread over the
    half spectrum; the fractions are frequency flat on coarse_grid levels in [0, 1].
    """
    mu = check_weights(weights)
    objective = _WeightedObjective(sub, mu)
    grid = cfg.coarse_grid
    parts = sub.half_length + 1

    count = math.comb(grid + parts - 1, parts - 1)
    evaluations = count * count * grid * grid
    if evaluations > EXHAUSTIVE_LIMIT:
        raise ValueError(
            f"exhaustive search needs {evaluations} evaluations, "
            f"the limit is {EXHAUSTIVE_LIMIT}"
        )

    share = np.array(
        [np.array(q, dtype=np.float64) / grid for q in _compositions(grid, parts)]
    ) * (sub.n / objective.multiplicity)
    levels = np.linspace(0.0, 1.0, grid) if grid > 1 else np.zeros(1)

    best_value = -math.inf
    best_state: dict[Block, FloatArray] = {}
    for q1, q2, a1, a2 in itertools.product(share, share, levels, levels):
        state = {
            "p1": q1 * budgets[0],
            "p2": q2 * budgets[1],
            "a1": np.full(parts, a1),
            "a2": np.full(parts, a2),
        }
        value = objective.value(state)
        if value > best_value:
            best_value, best_state = value, state

    logging.info("Exhaustive search over %d allocations: %.9g", evaluations, best_value)
    alloc = Allocation(sub.n, *(objective.full(best_state[name]) for name in BLOCKS))
    return _sample(sub, objective.weights, alloc, evaluations, True)


def trace_boundary(
    sub: SubchannelSet,
    budgets: tuple[Power, Power],
    weight_grid: Sequence[Sequence[float]],
    cfg: OptimizerConfig = OptimizerConfig(),
) -> list[BoundarySample]:
    """One boundary sample per weight vector, in input order.

    Every allocation found is also tried under the other weight vectors, so no
    sample is beaten by a polytope the search has already seen.
    """
    if len(weight_grid) == 0:
        raise ValueError("weight grid is empty")

    samples = [optimize_weighted(sub, budgets, mu, cfg) for mu in weight_grid]

    res = []
    for idx, sample in enumerate(samples):
        best = sample
        for other_idx, other in enumerate(samples):
            point = max_weighted_rate(other.bounds, sample.weights)
            if point.weighted(sample.weights) > best.objective + TIE_TOLERANCE:
                logging.debug(
                    "Sample %d improved by the allocation of sample %d", idx, other_idx
                )
                best = replace(
                    sample,
                    point=point,
                    allocation=other.allocation,
                    bounds=other.bounds,
                )
        res.append(best)
    return res


__all__ = [
    "OptimizerConfig",
    "BoundarySample",
    "WaterfillResult",
    "project_power",
    "waterfill_single_user",
    "optimize_weighted",
    "exhaustive_weighted",
    "trace_boundary",
]
