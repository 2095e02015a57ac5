"""The linear Gaussian compound MAC with a common message and ISI."""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence, cast, get_args, overload

import numpy as np
import numpy.typing as npt

from .errors import InvalidNoise, InvalidPower, InvalidTaps, LengthMismatch

Frequency = float
Power = float
FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

# Link "pq" carries sender p to receiver q
LinkName = Literal["h11", "h12", "h21", "h22"]
LINKS = cast(tuple[LinkName, ...], get_args(LinkName))

Receiver = Literal[1, 2]

PSD_GRID_POINTS = 4096
PSD_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ImpulseResponse:
    """FIR coefficients h_0, ..., h_m of one link."""

    taps: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "taps", tuple(float(tap) for tap in self.taps))
        if len(self.taps) == 0:
            raise InvalidTaps("impulse response must hold at least one tap")

    @property
    def memory(self) -> int:
        """The channel memory m."""
        return len(self.taps) - 1

    @property
    def array(self) -> FloatArray:
        """The taps as a float array."""
        return np.asarray(self.taps, dtype=np.float64)

    def padded(self, memory: int) -> "ImpulseResponse":
        """Zero pad the response up to the given memory."""
        if memory < self.memory:
            raise InvalidTaps(f"cannot pad memory {self.memory} down to {memory}")
        return ImpulseResponse(self.taps + (0.0,) * (memory - self.memory))


@dataclass(frozen=True)
class NoiseModel:
    """One-sided autocorrelation R[0], ..., R[t_max - 1] of a stationary noise."""

    autocorr: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "autocorr", tuple(float(r) for r in self.autocorr))
        if len(self.autocorr) == 0:
            raise InvalidNoise("autocorrelation must hold at least R[0]")

    @property
    def support(self) -> int:
        """The support bound t_max."""
        return len(self.autocorr)

    @property
    def array(self) -> FloatArray:
        """The one-sided autocorrelation as a float array."""
        return np.asarray(self.autocorr, dtype=np.float64)

    @classmethod
    def white(cls, power: Power = 1.0) -> "NoiseModel":
        """White noise of the given variance."""
        return cls((power,))


@dataclass(frozen=True)
class ChannelSpec:
    """The four links, the two noises and the two power budgets."""

    h11: ImpulseResponse
    h12: ImpulseResponse
    h21: ImpulseResponse
    h22: ImpulseResponse
    noise1: NoiseModel = field(default_factory=NoiseModel.white)
    noise2: NoiseModel = field(default_factory=NoiseModel.white)
    p1: Power = 1.0
    p2: Power = 1.0

    @property
    def memory(self) -> int:
        """The largest memory over the four links."""
        return max(self.link(name).memory for name in LINKS)

    @property
    def noise_support(self) -> int:
        """The common noise support t_max."""
        return max(self.noise1.support, self.noise2.support)

    @property
    def budgets(self) -> tuple[Power, Power]:
        """The power budgets (P1, P2)."""
        return self.p1, self.p2

    def link(self, name: LinkName) -> ImpulseResponse:
        """Look up a link by name."""
        return cast(ImpulseResponse, getattr(self, name))

    def noise(self, receiver: Receiver) -> NoiseModel:
        """Look up the noise seen by a receiver."""
        return self.noise1 if receiver == 1 else self.noise2

    @classmethod
    def from_taps(
        cls,
        h11: Sequence[float],
        h12: Sequence[float],
        h21: Sequence[float],
        h22: Sequence[float],
        noise1: Sequence[float] = (1.0,),
        noise2: Sequence[float] = (1.0,),
        p1: Power = 1.0,
        p2: Power = 1.0,
    ) -> "ChannelSpec":
        """Build a spec from plain sequences."""
        return cls(
            ImpulseResponse(tuple(h11)),
            ImpulseResponse(tuple(h12)),
            ImpulseResponse(tuple(h21)),
            ImpulseResponse(tuple(h22)),
            NoiseModel(tuple(noise1)),
            NoiseModel(tuple(noise2)),
            p1,
            p2,
        )


@overload
def transfer_function(h: ImpulseResponse, omega: Frequency) -> complex:
    ...


@overload
def transfer_function(h: ImpulseResponse, omega: FloatArray) -> ComplexArray:
    ...


def transfer_function(
    h: ImpulseResponse, omega: Frequency | FloatArray
) -> complex | ComplexArray:
    """Evaluate H(w) = sum_t h_t exp(-jwt)."""
    lags = np.arange(len(h.taps))
    phases = np.exp(-1j * np.multiply.outer(np.asarray(omega, dtype=np.float64), lags))
    res = phases @ h.array
    if np.ndim(omega) == 0:
        return complex(res)
    return cast(ComplexArray, res)


def _raw_psd(noise: NoiseModel, omega: Frequency | FloatArray) -> FloatArray:
    """Unclamped N(w) = R[0] + 2 sum_{t>=1} R[t] cos(wt)."""
    autocorr = noise.array
    lags = np.arange(1, noise.support)
    cosines = np.cos(np.multiply.outer(np.asarray(omega, dtype=np.float64), lags))
    return cast(FloatArray, autocorr[0] + 2.0 * (cosines @ autocorr[1:]))


@overload
def noise_psd(noise: NoiseModel, omega: Frequency) -> float:
    ...


@overload
def noise_psd(noise: NoiseModel, omega: FloatArray) -> FloatArray:
    ...


def noise_psd(noise: NoiseModel, omega: Frequency | FloatArray) -> float | FloatArray:
    """Evaluate the noise spectral density, clamping round-off below zero."""
    psd = _raw_psd(noise, omega)
    psd = np.where((psd < 0) & (psd >= -PSD_TOLERANCE), 0.0, psd)
    if np.ndim(omega) == 0:
        return float(psd)
    return cast(FloatArray, psd)


def _check_noise(name: str, noise: NoiseModel) -> None:
    """Raise InvalidNoise if the spectral density dips below zero on the check grid."""
    if not all(math.isfinite(r) for r in noise.autocorr):
        raise InvalidNoise(f"{name}: autocorrelation holds a non-finite value")
    if noise.autocorr[0] <= 0:
        raise InvalidNoise(f"{name}: R[0] must be positive, got {noise.autocorr[0]}")

    grid = 2 * np.pi * np.arange(PSD_GRID_POINTS) / PSD_GRID_POINTS
    psd = _raw_psd(noise, grid)
    worst = int(np.argmin(psd))
    if psd[worst] < -PSD_TOLERANCE:
        raise InvalidNoise(
            f"{name}: spectral density is {psd[worst]:.3e} at w={grid[worst]:.6f}"
        )


def validate_spec(spec: ChannelSpec) -> ChannelSpec:
    """Check a spec and zero pad its links to a common memory."""
    for name in LINKS:
        taps = spec.link(name).taps
        for idx, tap in enumerate(taps):
            if not math.isfinite(tap):
                raise InvalidTaps(f"{name}: tap {idx} is not finite")

    _check_noise("noise1", spec.noise1)
    _check_noise("noise2", spec.noise2)

    for budget_name, budget in (("p1", spec.p1), ("p2", spec.p2)):
        if not math.isfinite(budget) or budget < 0:
            raise InvalidPower(f"{budget_name}: budget must be >= 0, got {budget}")

    memory = max(spec.memory, spec.noise_support - 1)
    if any(spec.link(name).memory != memory for name in LINKS):
        logging.debug("Padding links to common memory %d", memory)

    return replace(
        spec,
        **{name: spec.link(name).padded(memory) for name in LINKS},
        p1=float(spec.p1),
        p2=float(spec.p2),
    )


def linear_output(
    spec: ChannelSpec, x1: FloatArray, x2: FloatArray
) -> tuple[FloatArray, FloatArray]:
    """Noiseless outputs of the linear ISI channel for inputs starting at time 0.

    The outputs are truncated to the input length, so sample k only sees the
    inputs x_0, ..., x_k.
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.shape != x2.shape:
        raise LengthMismatch(f"inputs have lengths {x1.size} and {x2.size}")

    length = x1.size
    y1 = (
        np.convolve(spec.h11.array, x1)[:length]
        + np.convolve(spec.h21.array, x2)[:length]
    )
    y2 = (
        np.convolve(spec.h12.array, x1)[:length]
        + np.convolve(spec.h22.array, x2)[:length]
    )
    return y1, y2


__all__ = [
    "Frequency",
    "Power",
    "FloatArray",
    "ComplexArray",
    "LinkName",
    "LINKS",
    "Receiver",
    "PSD_GRID_POINTS",
    "PSD_TOLERANCE",
    "ImpulseResponse",
    "NoiseModel",
    "ChannelSpec",
    "transfer_function",
    "noise_psd",
    "validate_spec",
    "linear_output",
]
