"""The n-block circular channel and its split into parallel sub-channels."""

import logging
from dataclasses import dataclass
from typing import cast

import numpy as np
import numpy.typing as npt
import scipy.fft

from .channel_model import (
    LINKS,
    ChannelSpec,
    ComplexArray,
    FloatArray,
    ImpulseResponse,
    LinkName,
    NoiseModel,
    Receiver,
)
from .errors import BlockTooShort, IndefinitePeriodization, LengthMismatch

BlockLength = int
RealBlock = FloatArray
IntArray = npt.NDArray[np.int_]

EIGENVALUE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SubchannelSet:
    """Per-frequency gains and noise levels of the n parallel compound MACs."""

    n: BlockLength
    h11: ComplexArray
    h12: ComplexArray
    h21: ComplexArray
    h22: ComplexArray
    noise1: FloatArray
    noise2: FloatArray

    @property
    def frequencies(self) -> FloatArray:
        """The DFT frequencies w_k = 2 pi k / n."""
        return cast(FloatArray, 2 * np.pi * np.arange(self.n) / self.n)

    @property
    def half_length(self) -> int:
        """l = floor(n / 2), the last free index of a conjugate-symmetric profile."""
        return self.n // 2

    def gain(self, link: LinkName) -> ComplexArray:
        """Per-frequency complex gain of a link."""
        return cast(ComplexArray, getattr(self, link))

    def noise(self, receiver: Receiver) -> FloatArray:
        """Per-frequency noise level at a receiver."""
        return self.noise1 if receiver == 1 else self.noise2


def mirror_index(n: BlockLength) -> IntArray:
    """Map every index k to its representative min(k, n - k) in 0..floor(n/2)."""
    idx = np.arange(n)
    return np.minimum(idx, (n - idx) % n)


def extend_impulse_response(h: ImpulseResponse, n: BlockLength) -> RealBlock:
    """Extend h_0..h_m with n - m - 1 zeros."""
    if n <= h.memory:
        raise BlockTooShort(f"block length {n} must exceed memory {h.memory}")

    block = np.zeros(n, dtype=np.float64)
    block[: len(h.taps)] = h.array
    return block


def dft(x: RealBlock | ComplexArray) -> ComplexArray:
    """Unnormalised forward DFT.

    Real blocks go through the real transform and are mirrored, so the result
    is exactly conjugate symmetric.
    """
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return cast(ComplexArray, scipy.fft.fft(x))

    n = x.size
    half = scipy.fft.rfft(x.astype(np.float64))
    return _mirror(half, n)


def _mirror(half: ComplexArray, n: BlockLength) -> ComplexArray:
    """Complete a half spectrum by conjugate symmetry."""
    full = half[mirror_index(n)]
    upper = np.arange(n) > n // 2
    full[upper] = np.conj(full[upper])
    return cast(ComplexArray, full)


def idft(spectrum: ComplexArray) -> RealBlock:
    """Inverse DFT (1/n normalised) of a conjugate-symmetric spectrum."""
    return cast(RealBlock, np.real(scipy.fft.ifft(spectrum)))


def circular_convolve(a: RealBlock, b: RealBlock) -> RealBlock:
    """c_k = sum_t a_t b_<k-t>_n."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"blocks have lengths {a.size} and {b.size}")

    res = np.zeros_like(b)
    for t, tap in enumerate(a):
        if tap != 0:
            # np.roll(b, t)[k] == b[(k - t) mod n]
            res += tap * np.roll(b, t)
    return res


def fold_autocorrelation(noise: NoiseModel, n: BlockLength) -> RealBlock:
    """R~[t] = sum_j R[t + jn], the two-sided autocorrelation folded into one block."""
    folded = np.zeros(n, dtype=np.float64)
    lags = np.arange(-(noise.support - 1), noise.support)
    np.add.at(folded, lags % n, noise.array[np.abs(lags)])
    return folded


def periodize_autocorrelation(noise: NoiseModel, n: BlockLength) -> FloatArray:
    """Eigenvalues of the circulant noise covariance of one n-block."""
    folded = fold_autocorrelation(noise, n)

    eigenvalues = np.array(dft(folded).real)
    worst = int(np.argmin(eigenvalues))
    if eigenvalues[worst] < -EIGENVALUE_TOLERANCE:
        raise IndefinitePeriodization(
            f"periodized noise has eigenvalue {eigenvalues[worst]:.3e} "
            f"at k={worst} for n={n}"
        )

    clamped = eigenvalues < 0
    if clamped.any():
        logging.debug("Clamping %d round-off eigenvalues to 0", int(clamped.sum()))
        eigenvalues[clamped] = 0.0
    return cast(FloatArray, eigenvalues)


def decompose(spec: ChannelSpec, n: BlockLength) -> SubchannelSet:
    """Decompose a validated spec into n parallel sub-channels."""
    gains = {name: dft(extend_impulse_response(spec.link(name), n)) for name in LINKS}
    return SubchannelSet(
        n,
        gains["h11"],
        gains["h12"],
        gains["h21"],
        gains["h22"],
        periodize_autocorrelation(spec.noise1, n),
        periodize_autocorrelation(spec.noise2, n),
    )


def circular_output(
    spec: ChannelSpec, x1: RealBlock, x2: RealBlock, n: BlockLength
) -> tuple[RealBlock, RealBlock]:
    """Noiseless outputs of the n-block circular channel for one block of inputs."""
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.size != n or x2.size != n:
        raise LengthMismatch(f"inputs have lengths {x1.size}, {x2.size}; expected {n}")

    taps = {name: extend_impulse_response(spec.link(name), n) for name in LINKS}
    y1 = circular_convolve(taps["h11"], x1) + circular_convolve(taps["h21"], x2)
    y2 = circular_convolve(taps["h12"], x1) + circular_convolve(taps["h22"], x2)
    return y1, y2


__all__ = [
    "BlockLength",
    "RealBlock",
    "EIGENVALUE_TOLERANCE",
    "SubchannelSet",
    "mirror_index",
    "extend_impulse_response",
    "dft",
    "idft",
    "circular_convolve",
    "fold_autocorrelation",
    "periodize_autocorrelation",
    "decompose",
    "circular_output",
]
