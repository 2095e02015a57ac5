"""Line-by-line memory measurement of a call with memory_profiler's LineProfiler."""

from dataclasses import dataclass
from functools import wraps
from typing import Callable, Literal, ParamSpec, TypeVar, cast

from memory_profiler import LineProfiler, choose_backend

P = ParamSpec("P")  # pylint: disable=invalid-name
R = TypeVar("R")

BackendOptions = Literal["psutil", "psutil_pss", "psutil_uss", "posix", "tracemalloc"]

MiB = float


@dataclass(frozen=True)
class LineMemory:
    """Memory recorded for one source line of the measured function."""

    line: int
    increment: MiB
    total: MiB
    occurrences: int


@dataclass(frozen=True)
class MemoryReport:
    """All lines that touched memory, in execution order."""

    lines: tuple[LineMemory, ...]

    @property
    def increment(self) -> MiB:
        """Memory added by the body; the first record is the call itself."""
        return sum(rec.increment for rec in self.lines[1:])

    @property
    def peak(self) -> MiB:
        """Largest resident total seen on any line."""
        return max((rec.total for rec in self.lines), default=0.0)


MeasuredCallable = Callable[P, tuple[R, MemoryReport]]


def measure_memory(
    backend: BackendOptions = "psutil",
) -> Callable[[Callable[P, R]], MeasuredCallable[P, R]]:
    """Decorate a function so it also returns a MemoryReport of its own lines."""
    chosen = cast(BackendOptions, choose_backend(backend))
    if chosen == "tracemalloc":
        import tracemalloc  # pylint: disable=import-outside-toplevel

        if not tracemalloc.is_tracing():
            tracemalloc.start()

    def decorator(func: Callable[P, R]) -> MeasuredCallable[P, R]:
        @wraps(func)
        def wrapper(*args: P.args, **kwargs: P.kwargs) -> tuple[R, MemoryReport]:
            profiler = LineProfiler(backend=chosen)
            val = cast(R, profiler(func)(*args, **kwargs))
            lines = tuple(
                LineMemory(lineno, *mem)
                for _, records in profiler.code_map.items()
                for lineno, mem in records
                if mem
            )
            return val, MemoryReport(lines)

        return wrapper

    return decorator


__all__ = ["LineMemory", "MemoryReport", "measure_memory"]
