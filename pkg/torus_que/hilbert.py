"""
Hilbert - The state space H_N of torus-periodic states at h = 1/N

States are functions on Z/NZ. The inner product carries a 1/N weight,

    <psi, phi> = (1/N) * sum_Q psi(Q) * conj(phi(Q)),

so a normalized state has entries of typical modulus one. The Fourier
transform uses the kernel e_N(-QP) with a 1/sqrt(N) prefactor, which is
numpy's "ortho" FFT normalization.
"""

from dataclasses import dataclass

import numpy as np

from torus_que.constants import NORMALIZED_TOL
from torus_que.errors import DimensionMismatchError


@dataclass(frozen=True, eq=False)
class StateVector:
    """An element of H_N

    Attributes:
        entries: Read-only complex128 array of length N holding psi(Q)
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.entries, dtype=np.complex128).reshape(-1)
        if values.size == 0:
            raise ValueError("a state needs at least one entry")
        values.setflags(write=False)
        object.__setattr__(self, "entries", values)

    @property
    def dim(self) -> int:
        return int(self.entries.size)

    def norm_squared(self) -> float:
        return float(np.vdot(self.entries, self.entries).real) / self.dim

    def is_normalized(self, tol: float = NORMALIZED_TOL) -> bool:
        return abs(self.norm_squared() - 1.0) <= tol

    def normalized(self) -> "StateVector":
        return StateVector(self.entries / np.sqrt(self.norm_squared()))

    def __getitem__(self, q: int) -> complex:
        return complex(self.entries[q % self.dim])


def basis_state(n: int, q: int) -> StateVector:
    """Normalized position eigenstate sqrt(N) * delta_Q"""
    values = np.zeros(n, dtype=np.complex128)
    values[q % n] = np.sqrt(n)
    return StateVector(values)


def _check_dims(psi: StateVector, phi: StateVector) -> None:
    if psi.dim != phi.dim:
        raise DimensionMismatchError(psi.dim, phi.dim)


def inner(psi: StateVector, phi: StateVector) -> complex:
    """Weighted inner product (1/N) sum psi(Q) conj(phi(Q))"""
    _check_dims(psi, phi)
    return complex(np.vdot(phi.entries, psi.entries)) / psi.dim


def dft(psi: StateVector) -> StateVector:
    """psi_hat(P) = N^{-1/2} sum_Q psi(Q) e_N(-QP)"""
    return StateVector(np.fft.fft(psi.entries, norm="ortho"))


def inverse_dft(psihat: StateVector) -> StateVector:
    """psi(Q) = N^{-1/2} sum_P psi_hat(P) e_N(PQ)"""
    return StateVector(np.fft.ifft(psihat.entries, norm="ortho"))


def parity(psi: StateVector) -> StateVector:
    """psi(Q) -> psi(-Q)"""
    return StateVector(np.roll(psi.entries[::-1], 1))


def dft_columns(block: np.ndarray) -> np.ndarray:
    """Apply the transform to every column of an N x k block"""
    return np.fft.fft(block, axis=0, norm="ortho")


def inverse_dft_columns(block: np.ndarray) -> np.ndarray:
    """Apply the inverse transform to every column of an N x k block"""
    return np.fft.ifft(block, axis=0, norm="ortho")
