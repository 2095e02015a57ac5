"""Independent evaluation of the rate terms by dense log-determinants.

The n-block circular channel is written out as explicit circulant matrices and
the eight mutual informations of the jointly Gaussian inputs are computed from
the output covariances, without going through the DFT decomposition.
"""

import math
from dataclasses import dataclass
from typing import cast

import numpy as np
import scipy.linalg

from .channel_model import ChannelSpec, ComplexArray, FloatArray, LinkName
from .errors import InvalidAllocation, SingularNoise
from .rate_region import Allocation, RateBounds
from .spectral import (
    BlockLength,
    RealBlock,
    dft,
    extend_impulse_response,
    fold_autocorrelation,
    idft,
)

Matrix = FloatArray

ORACLE_MAX_BLOCK = 128
PSD_FLOOR = -1e-9
NOISE_FLOOR = 1e-12

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class CirculantMatrix:
    """A circulant matrix stored by its first column."""

    first_column: RealBlock

    @property
    def n(self) -> BlockLength:
        """The matrix size."""
        return int(self.first_column.size)

    def dense(self) -> Matrix:
        """The full n x n matrix, C[i, j] = c[(i - j) mod n]."""
        return cast(Matrix, scipy.linalg.circulant(self.first_column))

    def eigenvalues(self) -> ComplexArray:
        """Eigenvalues, the DFT of the first column."""
        return dft(self.first_column)

    @classmethod
    def from_eigenvalues(cls, eigenvalues: FloatArray) -> "CirculantMatrix":
        """The real symmetric circulant with the given (even) eigenvalue profile."""
        return cls(idft(np.asarray(eigenvalues, dtype=np.complex128)))


@dataclass(frozen=True)
class ChannelMatrices:
    """Circulant link operators C_pq and noise covariances of one n-block."""

    c11: CirculantMatrix
    c12: CirculantMatrix
    c21: CirculantMatrix
    c22: CirculantMatrix
    noise1: CirculantMatrix
    noise2: CirculantMatrix


def build_channel_matrices(spec: ChannelSpec, n: BlockLength) -> ChannelMatrices:
    """Link operators and noise covariances of the n-block circular channel."""
    links: dict[LinkName, CirculantMatrix] = {
        name: CirculantMatrix(extend_impulse_response(spec.link(name), n))
        for name in ("h11", "h12", "h21", "h22")
    }
    return ChannelMatrices(
        links["h11"],
        links["h12"],
        links["h21"],
        links["h22"],
        CirculantMatrix(fold_autocorrelation(spec.noise1, n)),
        CirculantMatrix(fold_autocorrelation(spec.noise2, n)),
    )


def psd_check(matrix: Matrix) -> bool:
    """Whether a symmetric matrix has no eigenvalue below -1e-9."""
    eigenvalues = scipy.linalg.eigvalsh(np.asarray(matrix, dtype=np.float64))
    return bool(eigenvalues.min() >= PSD_FLOOR)


@dataclass(frozen=True)
class JointInputModel:
    """Covariance structure induced by the Gaussian mappings of both users.

    X1 = sqrt(a1 P1) W0 + sqrt((1 - a1) P1) W1 and likewise for X2, applied per
    frequency. Conditioning on the common message removes the W0 part, which
    leaves the private (1 - a_q) P_q profiles and no cross covariance.
    """

    n: BlockLength
    p1: FloatArray
    p2: FloatArray
    a1: FloatArray
    a2: FloatArray

    @classmethod
    def from_allocation(cls, alloc: Allocation) -> "JointInputModel":
        """Copy the profiles of an allocation and check the stacked covariance."""
        model = cls(alloc.n, alloc.p1, alloc.p2, alloc.a1, alloc.a2)
        if not psd_check(model.stacked(given_common=False)):
            raise InvalidAllocation(
                "stacked input covariance is not positive semidefinite"
            )
        return model

    def covariance(self, user: int, given_common: bool) -> Matrix:
        """Sigma_{x_q} (or Sigma_{x_q | u})."""
        power = self.p1 if user == 1 else self.p2
        fraction = self.a1 if user == 1 else self.a2
        profile = (1.0 - fraction) * power if given_common else power
        return CirculantMatrix.from_eigenvalues(profile).dense()

    def cross_covariance(self, given_common: bool) -> Matrix:
        """Sigma_{x_1 x_2}; zero once the common message is known."""
        if given_common:
            return np.zeros((self.n, self.n))
        profile = np.sqrt(self.a1 * self.a2 * self.p1 * self.p2)
        return CirculantMatrix.from_eigenvalues(profile).dense()

    def stacked(self, given_common: bool) -> Matrix:
        """The 2n x 2n covariance of (x_1, x_2)."""
        cross = self.cross_covariance(given_common)
        return cast(
            Matrix,
            np.block(
                [
                    [self.covariance(1, given_common), cross],
                    [cross.T, self.covariance(2, given_common)],
                ]
            ),
        )


def _logdet(matrix: Matrix) -> float:
    """log det of a symmetric positive definite matrix via its Cholesky factor."""
    factor, _ = scipy.linalg.cho_factor(matrix, lower=True)
    return float(2.0 * np.sum(np.log(np.diag(factor))))


def _information(
    operator: Matrix, input_cov: Matrix, noise: Matrix, noise_logdet: float
) -> float:
    """(1/2n) log2 det(noise + A S A^T) / det(noise)."""
    received = noise + operator @ input_cov @ operator.T
    received = 0.5 * (received + received.T)
    n = noise.shape[0]
    return (_logdet(received) - noise_logdet) / (2 * n * _LOG2)


def gaussian_mi_terms(
    spec: ChannelSpec, n: BlockLength, alloc: Allocation
) -> RateBounds:
    """The eight normalised mutual informations of the Gaussian inputs."""
    if n > ORACLE_MAX_BLOCK:
        raise ValueError(
            f"dense evaluation is limited to n <= {ORACLE_MAX_BLOCK}, got {n}"
        )
    if alloc.n != n:
        raise InvalidAllocation(f"allocation has n={alloc.n}, expected {n}")

    matrices = build_channel_matrices(spec, n)
    noise = {1: matrices.noise1.dense(), 2: matrices.noise2.dense()}
    for receiver, cov in noise.items():
        smallest = scipy.linalg.eigvalsh(cov).min()
        if smallest < NOISE_FLOOR:
            raise SingularNoise(
                f"noise{receiver}: covariance eigenvalue {smallest:.3e} for n={n}"
            )
    noise_logdet = {receiver: _logdet(cov) for receiver, cov in noise.items()}

    model = JointInputModel.from_allocation(alloc)
    private = model.stacked(given_common=True)
    joint = model.stacked(given_common=False)
    private1 = private[:n, :n]
    private2 = private[n:, n:]

    c11, c12, c21, c22 = (
        m.dense() for m in (matrices.c11, matrices.c12, matrices.c21, matrices.c22)
    )
    into1 = np.hstack([c11, c21])
    into2 = np.hstack([c12, c22])

    terms = (
        _information(c11, private1, noise[1], noise_logdet[1]),
        _information(c12, private1, noise[2], noise_logdet[2]),
        _information(c21, private2, noise[1], noise_logdet[1]),
        _information(c22, private2, noise[2], noise_logdet[2]),
        _information(into1, private, noise[1], noise_logdet[1]),
        _information(into2, private, noise[2], noise_logdet[2]),
        _information(into1, joint, noise[1], noise_logdet[1]),
        _information(into2, joint, noise[2], noise_logdet[2]),
    )
    return RateBounds(terms)


__all__ = [
    "Matrix",
    "ORACLE_MAX_BLOCK",
    "CirculantMatrix",
    "ChannelMatrices",
    "JointInputModel",
    "build_channel_matrices",
    "psd_check",
    "gaussian_mi_terms",
]
