"""Command line surface: rate evaluation, boundary tracing, strong interference
checks and convergence sweeps."""

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
from pydantic import ValidationError

from .channel_model import ChannelSpec, validate_spec
from .config import (
    AllocationDocument,
    ChannelSpecDocument,
    WeightGridDocument,
    load_document,
)
from .errors import DomainError, NumericError
from .optimizer import OptimizerConfig, exhaustive_weighted, trace_boundary
from .oracle import ORACLE_MAX_BLOCK, gaussian_mi_terms
from .rate_region import (
    DEFAULT_QUADRATURE_POINTS,
    TERM_COUNT,
    Allocation,
    RegionConstraints,
    SpectralProfile,
    rate_terms_discrete,
    rate_terms_integral,
    region_constraints,
    region_vertices,
    sicc_region_constraints,
    strong_interference_check,
    warn_if_silent,
)
from .spectral import decompose

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NUMERIC = 4

DEFAULT_BLOCK_LENGTH = 64
CSV_FLOAT_FORMAT = ".17g"


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs, resolved from the parsed flags."""

    command: str
    spec: str
    n: int = DEFAULT_BLOCK_LENGTH
    quadrature_points: int = DEFAULT_QUADRATURE_POINTS
    seed: int = 0
    out: str | None = None
    allocation: str = "flat"
    oracle: bool = False
    sicc: bool = False
    weights: str = ""
    exhaustive: bool = False
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    ns: tuple[int, ...] = ()
    a1: float = 0.0
    a2: float = 0.0

    def __post_init__(self) -> None:
        if not self.spec:
            raise ValueError("--spec is empty")
        if self.out == "":
            raise ValueError("--out is empty")
        if self.n < 1:
            raise ValueError(f"--n must be positive, got {self.n}")
        if self.quadrature_points < 1:
            raise ValueError(
                f"--quadrature-points must be positive, got {self.quadrature_points}"
            )
        if self.command == "region" and not self.weights:
            raise ValueError("--weights is empty")
        if self.command == "converge" and not self.ns:
            raise ValueError("--ns holds no block length")

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "RunConfig":
        """Collect the global flags and those of the chosen subcommand."""
        defaults = OptimizerConfig()
        optimizer = OptimizerConfig(
            multistarts=getattr(args, "multistarts", defaults.multistarts),
            max_iterations=getattr(args, "max_iterations", defaults.max_iterations),
            seed=args.seed,
            coarse_grid=getattr(args, "coarse_grid", defaults.coarse_grid),
        )
        ns = getattr(args, "ns", "")
        return cls(
            command=args.command,
            spec=args.spec,
            n=args.n,
            quadrature_points=args.quadrature_points,
            seed=args.seed,
            out=args.out,
            allocation=getattr(args, "allocation", "flat"),
            oracle=getattr(args, "oracle", False),
            sicc=getattr(args, "sicc", False),
            weights=getattr(args, "weights", ""),
            exhaustive=getattr(args, "exhaustive", False),
            optimizer=optimizer,
            ns=tuple(int(v) for v in ns.split(",") if v.strip()),
            a1=getattr(args, "a1", 0.0),
            a2=getattr(args, "a2", 0.0),
        )


Command = Callable[[RunConfig], int]


def _fmt(value: float) -> str:
    """Format a float for CSV output."""
    return format(value, CSV_FLOAT_FORMAT)


def _constraints_report(constraints: RegionConstraints) -> dict[str, Any]:
    """JSON view of the four polytope bounds."""
    return {
        "r1_max": constraints.r1_max,
        "r2_max": constraints.r2_max,
        "sum_max": constraints.sum_max,
        "total_max": constraints.total_max,
        "binding": list(constraints.binding),
    }


def _emit(text: str, out: str | None) -> None:
    """Write text to the output file, or to stdout without one."""
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logging.info("Wrote %s", out)


def _emit_json(report: dict[str, Any], out: str | None) -> None:
    """Write a report as indented JSON."""
    _emit(json.dumps(report, indent=2) + "\n", out)


def _emit_csv(
    header: Sequence[str], rows: Sequence[Sequence[str]], out: str | None
) -> None:
    """Write a header and rows as CSV."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _emit(buffer.getvalue(), out)


def _load_spec(config: RunConfig) -> ChannelSpec:
    """Read and validate the channel spec document."""
    spec = validate_spec(load_document(config.spec, ChannelSpecDocument).to_spec())
    logging.info(
        "Loaded %s: memory %d, budgets %s", config.spec, spec.memory, spec.budgets
    )
    return spec


def _load_allocation(config: RunConfig, spec: ChannelSpec) -> Allocation:
    """The flat allocation, or the one read from the allocation document."""
    if config.allocation == "flat":
        return Allocation.flat(config.n, spec.p1, spec.p2)
    alloc = load_document(config.allocation, AllocationDocument).to_allocation()
    if alloc.n != config.n:
        logging.info("Using n=%d from %s", alloc.n, config.allocation)
    return alloc


def cmd_eval(config: RunConfig) -> int:
    """Report the eight terms, the polytope bounds and its vertices."""
    spec = _load_spec(config)
    alloc = _load_allocation(config, spec)
    alloc.check_budget(spec.p1, spec.p2)
    warn_if_silent(alloc)

    sub = decompose(spec, alloc.n)
    bounds = rate_terms_discrete(sub, alloc)
    constraints = region_constraints(bounds)
    report: dict[str, Any] = {
        "n": alloc.n,
        "terms": list(bounds.t),
        "constraints": _constraints_report(constraints),
        "vertices": [list(v.as_tuple()) for v in region_vertices(constraints)],
    }

    if config.sicc:
        verdict = strong_interference_check(sub)
        report["sicc"] = _constraints_report(sicc_region_constraints(bounds, verdict))

    if config.oracle:
        if alloc.n > ORACLE_MAX_BLOCK:
            raise ValueError(f"--oracle needs n <= {ORACLE_MAX_BLOCK}, got {alloc.n}")
        reference = gaussian_mi_terms(spec, alloc.n, alloc)
        report["oracle"] = {
            "terms": list(reference.t),
            "deltas": [abs(x - y) for x, y in zip(bounds.t, reference.t)],
        }

    _emit_json(report, config.out)
    return EXIT_OK


def _weight_grid(text: str) -> WeightGridDocument:
    """Read weights from a file if one exists at that path, else parse them inline."""
    if Path(text).is_file():
        return load_document(text, WeightGridDocument)
    return WeightGridDocument.parse_inline(text)


def cmd_region(config: RunConfig) -> int:
    """Trace boundary samples of the region, one CSV row per weight vector."""
    spec = _load_spec(config)
    grid = _weight_grid(config.weights).to_grid()
    cfg = config.optimizer
    sub = decompose(spec, config.n)

    logging.info("Tracing %d weight vectors at n=%d", len(grid), config.n)
    if config.exhaustive:
        samples = [exhaustive_weighted(sub, spec.budgets, mu, cfg) for mu in grid]
    else:
        samples = trace_boundary(sub, spec.budgets, grid, cfg)

    rows = [
        [
            *(_fmt(w) for w in s.weights),
            *(_fmt(r) for r in s.point.as_tuple()),
            str(s.converged).lower(),
        ]
        for s in samples
    ]
    header = ("mu0", "mu1", "mu2", "r0", "r1", "r2", "converged")
    _emit_csv(header, rows, config.out)
    return EXIT_OK


def cmd_check_si(config: RunConfig) -> int:
    """Report whether the strong interference condition holds at every w_k."""
    spec = _load_spec(config)
    sub = decompose(spec, config.n)
    verdict = strong_interference_check(sub)
    report: dict[str, Any] = {
        "n": config.n,
        "verdict": "holds" if verdict.holds_pointwise else "violated",
        "violated_at": list(verdict.violated_at),
        "all_equal": verdict.all_equal,
    }
    if verdict.holds_pointwise:
        bounds = rate_terms_discrete(sub, Allocation.flat(config.n, spec.p1, spec.p2))
        report["sicc"] = _constraints_report(sicc_region_constraints(bounds, verdict))

    _emit_json(report, config.out)
    return EXIT_OK


def cmd_converge(config: RunConfig) -> int:
    """Compare T_i(n) with the integral terms for a list of block lengths."""
    spec = _load_spec(config)
    profile = SpectralProfile.flat(spec.p1, spec.p2, config.a1, config.a2)
    integral = rate_terms_integral(spec, profile, config.quadrature_points)
    rows = []
    for n in config.ns:
        sub = decompose(spec, n)
        alloc = Allocation.flat(n, spec.p1, spec.p2, config.a1, config.a2)
        discrete = rate_terms_discrete(sub, alloc)
        for idx in range(1, TERM_COUNT + 1):
            t_n, t_inf = discrete.term(idx), integral.term(idx)
            error = abs(t_n - t_inf)
            rows.append([str(n), str(idx), _fmt(t_n), _fmt(t_inf), _fmt(error)])

    header = ("n", "term_index", "discrete", "integral", "abs_error")
    _emit_csv(header, rows, config.out)
    return EXIT_OK


COMMANDS: dict[str, Command] = {
    "eval": cmd_eval,
    "region": cmd_region,
    "check-si": cmd_check_si,
    "converge": cmd_converge,
}


def build_parser() -> argparse.ArgumentParser:
    """Global flags come before the subcommand."""
    defaults = OptimizerConfig()
    parser = argparse.ArgumentParser(
        prog="cmacc-isi",
        description="Achievable rate regions of the two-user Gaussian compound MAC "
        "with common message under intersymbol interference.",
    )
    parser.add_argument("--spec", required=True, help="channel spec JSON file")
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--n", type=int, default=DEFAULT_BLOCK_LENGTH, help="block length"
    )
    parser.add_argument(
        "--quadrature-points", type=int, default=DEFAULT_QUADRATURE_POINTS
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)

    subparsers = parser.add_subparsers(dest="command", required=True)

    eval_parser = subparsers.add_parser(
        "eval", help="evaluate the rate terms of one allocation"
    )
    eval_parser.add_argument(
        "--allocation", default="flat", help='allocation JSON file or "flat"'
    )
    eval_parser.add_argument(
        "--oracle", action="store_true", help="cross-check by log-determinants"
    )
    eval_parser.add_argument(
        "--sicc", action="store_true", help="add the strong interference bounds"
    )

    region_parser = subparsers.add_parser("region", help="trace the region boundary")
    region_parser.add_argument(
        "--weights", required=True, help='JSON file or inline "1,0,0;0,1,0"'
    )
    region_parser.add_argument(
        "--multistarts", type=int, default=defaults.multistarts
    )
    region_parser.add_argument(
        "--max-iterations", type=int, default=defaults.max_iterations
    )
    region_parser.add_argument(
        "--coarse-grid", type=int, default=defaults.coarse_grid
    )
    region_parser.add_argument(
        "--exhaustive", action="store_true", help="grid search (small n)"
    )

    subparsers.add_parser("check-si", help="check the strong interference condition")

    converge_parser = subparsers.add_parser(
        "converge", help="discrete vs integral terms"
    )
    converge_parser.add_argument(
        "--ns", required=True, help='block lengths, e.g. "64,128,256"'
    )
    converge_parser.add_argument("--a1", type=float, default=0.0)
    converge_parser.add_argument("--a2", type=float, default=0.0)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    level = max(logging.WARNING - 10 * args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s - %(levelname)s - %(message)s")

    try:
        return COMMANDS[args.command](RunConfig.from_namespace(args))
    except (FileNotFoundError, json.JSONDecodeError, ValidationError) as exc:
        logging.error("%s", exc)
        return EXIT_USAGE
    except DomainError as exc:
        logging.error("%s", exc)
        return EXIT_DOMAIN
    except (NumericError, np.linalg.LinAlgError) as exc:
        logging.error("%s", exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        logging.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
