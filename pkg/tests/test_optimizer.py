"""This module tests the boundary search."""

import logging
import math
import unittest

import numpy as np

from src import (
    Allocation,
    ChannelSpec,
    OptimizerConfig,
    decompose,
    exhaustive_weighted,
    is_achievable,
    max_weighted_rate,
    optimize_weighted,
    project_power,
    rate_terms_discrete,
    region_vertices,
    trace_boundary,
    validate_spec,
    waterfill_single_user,
)
from src.errors import LengthMismatch, ZeroChannel
from tests.helpers import identical_receivers, random_taps

logging.basicConfig(
    level=logging.DEBUG, format="%(asctime)s - %(levelname)s - %(message)s"
)

QUICK = OptimizerConfig(multistarts=2, max_iterations=300)


def two_tap_spec(p1: float = 1.0, p2: float = 1.0) -> ChannelSpec:
    """A small spec with memory one on every link."""
    return validate_spec(
        ChannelSpec.from_taps(
            [1, 0.5], [0.8], [0.4, 0.3], [1, -0.2], noise2=[1.0, 0.2], p1=p1, p2=p2
        )
    )


class TestProjectPower(unittest.TestCase):
    """Test project_power."""

    def test_feasible_unchanged(self) -> None:
        """A symmetric profile within budget is returned as is."""
        raw = np.array([0.5, 1.0, 0.2, 1.0])
        np.testing.assert_array_equal(project_power(raw, 1.0), raw)

    def test_constant_overspend(self) -> None:
        """c > P everywhere comes down to P everywhere."""
        res = project_power(np.full(6, 3.0), 1.0)
        np.testing.assert_allclose(res, np.ones(6), atol=1e-12)

    def test_zero_budget(self) -> None:
        """Nothing to spend."""
        res = project_power(np.array([1.0, 2.0, 1.0]), 0.0)
        np.testing.assert_array_equal(res, np.zeros(3))

    def test_length_checked(self) -> None:
        """An explicit block length must match the profile."""
        with self.assertRaises(LengthMismatch):
            project_power(np.ones(4), 1.0, n=8)
        np.testing.assert_array_equal(project_power(np.ones(4), 1.0, n=4), np.ones(4))

    def test_kkt(self) -> None:
        """Random inputs: symmetric, nonnegative, budget tight, one shift on support."""
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(2, 20))
            raw = rng.normal(1.0, 2.0, size=n)
            budget = float(rng.uniform(0.1, 1.0))
            res = project_power(raw, budget)
            sym = 0.5 * (raw + raw[(-np.arange(n)) % n])

            np.testing.assert_array_equal(res, res[(-np.arange(n)) % n])
            self.assertTrue(np.all(res >= 0))
            self.assertLessEqual(res.mean(), budget + 1e-9)
            if np.maximum(sym, 0).mean() > budget:
                self.assertAlmostEqual(res.mean(), budget, places=9)
                active = res > 0
                shifts = sym[active] - res[active]
                np.testing.assert_allclose(
                    shifts, np.full(shifts.size, shifts[0]), atol=1e-9
                )
                # Inactive entries sit below the shift
                self.assertTrue(np.all(sym[~active] <= shifts[0] + 1e-9))


class TestWaterfill(unittest.TestCase):
    """Test waterfill_single_user."""

    def test_flat(self) -> None:
        """Unit SNR, unit budget."""
        res = waterfill_single_user(np.ones(8), 1.0)
        np.testing.assert_allclose(res.allocation, np.ones(8), atol=1e-12)
        self.assertAlmostEqual(res.capacity, 0.5, places=12)

    def test_two_levels(self) -> None:
        """Only the strong bins are filled, all to the same level."""
        snr = np.array([4.0, 4.0, 1.0, 1.0, 1.0, 1.0, 4.0, 4.0])
        res = waterfill_single_user(snr, 0.25)
        self.assertAlmostEqual(res.water_level, 0.75, places=12)
        np.testing.assert_allclose(
            res.allocation, np.where(snr == 4.0, 0.5, 0.0), atol=1e-12
        )
        active = res.allocation > 0
        np.testing.assert_allclose(
            res.allocation[active] + 1 / snr[active], res.water_level, atol=1e-12
        )
        self.assertAlmostEqual(res.capacity, 0.25 * math.log2(3), places=12)

    def test_zero_budget(self) -> None:
        """No budget, no capacity."""
        res = waterfill_single_user(np.array([1.0, 2.0]), 0.0)
        self.assertEqual(res.capacity, 0.0)
        np.testing.assert_array_equal(res.allocation, np.zeros(2))

    def test_zero_channel(self) -> None:
        """Every bin dead: the error carries the flat fallback."""
        with self.assertRaises(ZeroChannel) as ctx:
            waterfill_single_user(np.zeros(4), 1.0)
        self.assertEqual(ctx.exception.capacity, 0.0)
        np.testing.assert_array_equal(ctx.exception.allocation, np.ones(4))

    def test_beats_random(self) -> None:
        """No random feasible allocation does better."""
        rng = np.random.default_rng(1)
        snr = rng.uniform(0, 5, size=16)
        snr = 0.5 * (snr + snr[(-np.arange(16)) % 16])
        best = waterfill_single_user(snr, 1.5)
        self.assertAlmostEqual(best.allocation.mean(), 1.5, places=9)
        for _ in range(200):
            p = rng.uniform(size=16)
            p *= 1.5 / p.mean()
            capacity = np.sum(np.log2(1 + p * snr)) / 32
            self.assertLessEqual(capacity, best.capacity + 1e-12)


class TestOptimizeWeighted(unittest.TestCase):
    """Test optimize_weighted."""

    def test_single_user_flat(self) -> None:
        """P2 = 0 on the unit spec: R1 is the flat AWGN rate."""
        spec = validate_spec(ChannelSpec.from_taps([1], [1], [1], [1], p2=0.0))
        res = optimize_weighted(decompose(spec, 8), spec.budgets, (0, 1, 0), QUICK)
        self.assertAlmostEqual(res.point.r1, 0.5, places=6)
        self.assertTrue(res.converged)
        np.testing.assert_allclose(res.allocation.p1, np.ones(8), atol=1e-8)

    def test_single_user_flat_default_config(self) -> None:
        """The default search settles on the flat allocation, not merely near it."""
        spec = validate_spec(ChannelSpec.from_taps([1], [1], [1], [1], p2=0.0))
        res = optimize_weighted(decompose(spec, 16), spec.budgets, (0, 1, 0))
        self.assertTrue(res.converged)
        self.assertAlmostEqual(res.point.r1, 0.5, places=12)
        np.testing.assert_allclose(res.allocation.p1, np.ones(16), atol=1e-8)
        self.assertLessEqual(float(res.allocation.a1.max()), 1e-10)

    def test_common_only(self) -> None:
        """mu = (1, 0, 0) on the unit spec sends everything as common message."""
        spec = validate_spec(ChannelSpec.from_taps([1], [1], [1], [1]))
        res = optimize_weighted(decompose(spec, 8), spec.budgets, (1, 0, 0), QUICK)
        self.assertAlmostEqual(res.point.r0, 0.5 * math.log2(5), places=4)
        self.assertGreater(float(res.allocation.a1.min()), 0.99)
        self.assertGreater(float(res.allocation.a2.min()), 0.99)

    def test_waterfill_reduction(self) -> None:
        """One user, identical receivers: the search recovers water-filling."""
        rng = np.random.default_rng(2)
        cfg = OptimizerConfig(multistarts=1, max_iterations=2000, rel_tolerance=1e-12)
        for _ in range(10):
            base = validate_spec(
                ChannelSpec.from_taps(
                    random_taps(rng), [1], random_taps(rng), [1], p1=1.0, p2=0.0
                )
            )
            spec = identical_receivers(base)
            sub = decompose(spec, 64)
            snr = np.abs(sub.h11) ** 2 / sub.noise1
            capacity = waterfill_single_user(snr, spec.p1).capacity
            res = optimize_weighted(sub, spec.budgets, (0, 1, 0), cfg)
            self.assertGreaterEqual(res.objective, capacity - 1e-4)
            self.assertLessEqual(res.objective, capacity + 1e-9)

    def test_feasible(self) -> None:
        """The result obeys the budgets and sits in its own polytope."""
        spec = two_tap_spec()
        sub = decompose(spec, 8)
        res = optimize_weighted(sub, spec.budgets, (0.2, 0.5, 0.3), QUICK)
        res.allocation.check_budget(spec.p1, spec.p2)
        self.assertTrue(is_achievable(res.bounds, res.point))
        self.assertEqual(rate_terms_discrete(sub, res.allocation), res.bounds)
        recomputed = rate_terms_discrete(sub, res.allocation)
        self.assertTrue(is_achievable(recomputed, res.point))

    def test_not_worse_than_flat(self) -> None:
        """The search never ends below its flat warm start."""
        spec = two_tap_spec()
        sub = decompose(spec, 8)
        weights = (0.1, 0.6, 0.3)
        flat = Allocation.flat(8, spec.p1, spec.p2)
        start_point = max_weighted_rate(rate_terms_discrete(sub, flat), weights)
        start = start_point.weighted(weights)
        res = optimize_weighted(sub, spec.budgets, weights, QUICK, warm_starts=[flat])
        self.assertGreaterEqual(res.objective, start - 1e-12)

    def test_symmetric_swap(self) -> None:
        """Swapping the users of a symmetric spec swaps R1 and R2."""
        spec = validate_spec(ChannelSpec.from_taps([1, 0.5], [0.3], [0.3], [1, 0.5]))
        sub = decompose(spec, 8)
        first = optimize_weighted(sub, spec.budgets, (0, 1, 0), QUICK)
        second = optimize_weighted(sub, spec.budgets, (0, 0, 1), QUICK)
        self.assertAlmostEqual(first.point.r1, second.point.r2, delta=1e-6)
        self.assertAlmostEqual(first.point.r1, 0.5 * math.log2(1.09), delta=1e-6)

    def test_more_budget(self) -> None:
        """Doubling both budgets does not lower the common rate."""
        spec = identical_receivers(two_tap_spec())
        louder = identical_receivers(two_tap_spec(2.0, 2.0))
        res = optimize_weighted(decompose(spec, 8), spec.budgets, (1, 0, 0), QUICK)
        res_louder = optimize_weighted(
            decompose(louder, 8), louder.budgets, (1, 0, 0), QUICK
        )
        self.assertGreaterEqual(res_louder.objective, res.objective - 1e-9)

    def test_deterministic(self) -> None:
        """Same seed, same answer."""
        spec = two_tap_spec()
        sub = decompose(spec, 8)
        first = optimize_weighted(sub, spec.budgets, (0.3, 0.3, 0.4), QUICK)
        second = optimize_weighted(sub, spec.budgets, (0.3, 0.3, 0.4), QUICK)
        self.assertEqual(first.point, second.point)
        np.testing.assert_array_equal(first.allocation.a1, second.allocation.a1)

    def test_bad_config(self) -> None:
        """Counts and tolerances are validated."""
        with self.assertRaises(ValueError):
            OptimizerConfig(multistarts=0)
        with self.assertRaises(ValueError):
            OptimizerConfig(rel_tolerance=0.0)
        with self.assertRaises(ValueError):
            OptimizerConfig(grad_tolerance=-1.0)


class TestExhaustive(unittest.TestCase):
    """Test exhaustive_weighted."""

    def test_gradient_not_worse(self) -> None:
        """On n = 4 the search matches or beats the coarse grid."""
        spec = identical_receivers(two_tap_spec())
        sub = decompose(spec, 4)
        cfg = OptimizerConfig(multistarts=4, max_iterations=500, coarse_grid=4)
        grid = exhaustive_weighted(sub, spec.budgets, (1, 0, 0), cfg)
        search = optimize_weighted(sub, spec.budgets, (1, 0, 0), cfg)
        self.assertGreaterEqual(search.objective, grid.objective - 1e-4)
        grid.allocation.check_budget(spec.p1, spec.p2)
        self.assertAlmostEqual(grid.allocation.average_power[0], spec.p1, places=12)

    def test_flat_is_on_the_grid(self) -> None:
        """The grid contains the flat allocation, so it does at least as well."""
        spec = two_tap_spec()
        sub = decompose(spec, 4)
        weights = (0.2, 0.4, 0.4)
        cfg = OptimizerConfig(coarse_grid=4)
        grid = exhaustive_weighted(sub, spec.budgets, weights, cfg)
        flat_alloc = Allocation.flat(4, spec.p1, spec.p2)
        flat = max_weighted_rate(rate_terms_discrete(sub, flat_alloc), weights)
        self.assertGreaterEqual(grid.objective, flat.weighted(weights) - 1e-12)

    def test_limit(self) -> None:
        """Large grids are refused."""
        spec = two_tap_spec()
        with self.assertRaises(ValueError):
            exhaustive_weighted(
                decompose(spec, 64),
                spec.budgets,
                (1, 1, 1),
                OptimizerConfig(coarse_grid=8),
            )


class TestTraceBoundary(unittest.TestCase):
    """Test trace_boundary."""

    def test_axis_weights(self) -> None:
        """One sample per weight, each maximal along its own axis."""
        spec = two_tap_spec()
        sub = decompose(spec, 8)
        grid = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
        samples = trace_boundary(sub, spec.budgets, grid, QUICK)
        self.assertEqual(
            [s.weights for s in samples],
            [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)],
        )
        for axis, sample in enumerate(samples):
            self.assertTrue(is_achievable(sample.bounds, sample.point))
            best_axis = max(v.as_tuple()[axis] for v in region_vertices(sample.bounds))
            self.assertAlmostEqual(sample.point.as_tuple()[axis], best_axis, places=12)

    def test_mutually_consistent(self) -> None:
        """No sample is beaten by another sample's polytope."""
        spec = two_tap_spec()
        sub = decompose(spec, 8)
        grid = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (0.2, 0.4, 0.4), (0.5, 0.5, 0)]
        samples = trace_boundary(sub, spec.budgets, grid, QUICK)
        for sample in samples:
            for other in samples:
                rival_point = max_weighted_rate(other.bounds, sample.weights)
                rival = rival_point.weighted(sample.weights)
                self.assertGreaterEqual(sample.objective, rival - 1e-12)

    def test_convex_position(self) -> None:
        """No sample lies strictly inside a chord between two others."""
        spec = two_tap_spec()
        sub = decompose(spec, 8)
        grid = [
            (1, 0, 0),
            (0, 1, 0),
            (0, 0, 1),
            (0.2, 0.4, 0.4),
            (0.4, 0.3, 0.3),
            (0.1, 0.1, 0.8),
        ]
        samples = trace_boundary(sub, spec.budgets, grid, QUICK)
        points = [np.array(s.point.as_tuple()) for s in samples]
        for i, target in enumerate(points):
            for j, first in enumerate(points):
                for k, second in enumerate(points):
                    if i in (j, k):
                        continue
                    for lam in np.linspace(0.0, 1.0, 11):
                        chord = lam * first + (1 - lam) * second
                        self.assertFalse(np.all(chord > target + 1e-6))

    def test_empty_grid(self) -> None:
        """At least one weight vector."""
        spec = two_tap_spec()
        with self.assertRaises(ValueError):
            trace_boundary(decompose(spec, 8), spec.budgets, [], QUICK)


if __name__ == "__main__":
    unittest.main()
