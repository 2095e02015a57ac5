"""Benchmarking script: closed-form rate terms against dense log-determinants."""

import csv
import logging
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Annotated, Literal, cast, get_args

import numpy as np

from src import (
    Allocation,
    ChannelSpec,
    RateBounds,
    decompose,
    gaussian_mi_terms,
    rate_terms_discrete,
    validate_spec,
)
from src.profile import measure_memory

BASE_PATH = Path("./")
EvaluatorName = Literal["discrete", "oracle"]
EVALUATORS = cast(tuple[EvaluatorName, ...], get_args(EvaluatorName))
BLOCK_LENGTHS = (8, 16, 32, 64, 128)
REPEATS = 5

Time = float
Mem = float


@dataclass
class BenchmarkRow:
    """Timing and memory of one evaluator at one block length."""

    evaluator: EvaluatorName
    n: int
    time: Time
    mem: Mem
    max_abs_delta: float


@measure_memory(backend="psutil_uss")
def evaluate_discrete(spec: ChannelSpec, alloc: Allocation) -> tuple[
    Annotated[RateBounds, "Rate terms"],
    Annotated[Time, "Seconds per evaluation"],
]:
    """Decompose and evaluate through the DFT."""
    time_start = time.time()
    for _ in range(REPEATS):
        bounds = rate_terms_discrete(decompose(spec, alloc.n), alloc)
    time_end = time.time()
    return bounds, (time_end - time_start) / REPEATS


@measure_memory(backend="psutil_uss")
def evaluate_oracle(spec: ChannelSpec, alloc: Allocation) -> tuple[
    Annotated[RateBounds, "Rate terms"],
    Annotated[Time, "Seconds per evaluation"],
]:
    """Evaluate by dense circulant log-determinants."""
    time_start = time.time()
    for _ in range(REPEATS):
        bounds = gaussian_mi_terms(spec, alloc.n, alloc)
    time_end = time.time()
    return bounds, (time_end - time_start) / REPEATS


def random_allocation(
    n: int, spec: ChannelSpec, rng: np.random.Generator
) -> Allocation:
    """A random symmetric allocation spending both budgets."""
    half = n // 2 + 1
    mirror = np.minimum(np.arange(n), (n - np.arange(n)) % n)
    profiles = []
    for budget in spec.budgets:
        p = rng.uniform(size=half)[mirror]
        profiles.append(p * budget / p.mean())
    alphas = [rng.uniform(size=half)[mirror] for _ in range(2)]
    return Allocation(n, profiles[0], profiles[1], alphas[0], alphas[1])


def run_benchmark() -> None:
    """Main function for running the benchmark."""
    logging.basicConfig(
        level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s"
    )

    spec = validate_spec(
        ChannelSpec.from_taps(
            [1.0, 0.5, 0.25],
            [0.8, -0.3],
            [0.6, 0.2],
            [1.0, 0.4, -0.1],
            noise1=[1.0, 0.3],
            p1=2.0,
        )
    )
    rng = np.random.default_rng(0)

    output_dir = BASE_PATH / "results"
    output_dir.mkdir(exist_ok=True, parents=True)

    out_path = output_dir / f"benchmark-{time.strftime('%Y%m%d-%H%M%S')}.csv"
    with open(out_path, "w", encoding="utf-8") as csv_file:
        writer = csv.DictWriter(
            csv_file, fieldnames=["evaluator", "n", "time", "mem", "max_abs_delta"]
        )
        writer.writeheader()

        for n in BLOCK_LENGTHS:
            alloc = random_allocation(n, spec, rng)
            (fast, fast_time), fast_mem = evaluate_discrete(spec, alloc)
            (slow, slow_time), slow_mem = evaluate_oracle(spec, alloc)
            delta = max(abs(x - y) for x, y in zip(fast.t, slow.t))
            logging.info(
                "n=%d: discrete %.3es, oracle %.3es, max delta %.3e",
                n,
                fast_time,
                slow_time,
                delta,
            )

            for row in (
                BenchmarkRow("discrete", n, fast_time, fast_mem.increment, delta),
                BenchmarkRow("oracle", n, slow_time, slow_mem.increment, delta),
            ):
                writer.writerow({key: str(value) for key, value in asdict(row).items()})


if __name__ == "__main__":
    run_benchmark()
