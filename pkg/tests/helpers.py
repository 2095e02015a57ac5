"""Random specs and allocations shared by the test modules."""

import numpy as np

from src import Allocation, ChannelSpec, validate_spec
from src.spectral import mirror_index


def random_taps(rng: np.random.Generator, max_taps: int = 4) -> list[float]:
    """1 to max_taps Gaussian taps."""
    return list(rng.normal(size=int(rng.integers(1, max_taps + 1))))


def random_noise(rng: np.random.Generator) -> list[float]:
    """R = [1, r1, r2] with |r1| + |r2| <= 0.4, so the spectral density stays >= 0.2."""
    support = int(rng.integers(1, 4))
    lags = rng.uniform(-0.2, 0.2, size=support - 1)
    return [1.0, *lags]


def random_spec(rng: np.random.Generator, max_taps: int = 4) -> ChannelSpec:
    """A validated spec with random links, colored noises and budgets."""
    return validate_spec(
        ChannelSpec.from_taps(
            random_taps(rng, max_taps),
            random_taps(rng, max_taps),
            random_taps(rng, max_taps),
            random_taps(rng, max_taps),
            noise1=random_noise(rng),
            noise2=random_noise(rng),
            p1=float(rng.uniform(0.5, 3.0)),
            p2=float(rng.uniform(0.5, 3.0)),
        )
    )


def identical_receivers(spec: ChannelSpec) -> ChannelSpec:
    """h12 = h11, h22 = h21, noise2 = noise1."""
    return validate_spec(
        ChannelSpec(
            spec.h11,
            spec.h11,
            spec.h21,
            spec.h21,
            spec.noise1,
            spec.noise1,
            spec.p1,
            spec.p2,
        )
    )


def random_allocation(
    rng: np.random.Generator, n: int, p1: float, p2: float, alpha: bool = True
) -> Allocation:
    """A symmetric allocation spending both budgets exactly on average."""
    mirror = mirror_index(n)
    half = n // 2 + 1
    powers = []
    for budget in (p1, p2):
        profile = rng.uniform(0.0, 1.0, size=half)[mirror]
        powers.append(profile * budget / profile.mean() if budget > 0 else np.zeros(n))
    if alpha:
        a1, a2 = (rng.uniform(size=half)[mirror] for _ in range(2))
    else:
        a1, a2 = np.zeros(n), np.zeros(n)
    return Allocation(n, powers[0], powers[1], a1, a2)
