"""
Oracle - Dense brute-force ground truth

Full N x N matrices, a Schur-based eigensolver for normal matrices, power
iteration for operator norms and a one-sided Jacobi SVD as an independent
second method. Only tests, calibration and Egorov tables come here; the
structured code paths never materialize dense matrices.
"""

import threading
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from torus_que.constants import (
    EIGENVALUE_CLUSTER_TOL,
    JACOBI_MAX_SWEEPS,
    JACOBI_TOL,
    MAX_CONCURRENT_DENSE,
    MAX_DENSE_DIM,
    NORMALITY_TOL,
    POWER_ITERATION_MAX_ITER,
    POWER_ITERATION_TOL,
)
from torus_que.errors import DenseGuardError, NonNormalError
from torus_que.logger import get_logger
from torus_que.weyl import EigenBasis

logger = get_logger(__name__)

_dense_slots = threading.BoundedSemaphore(MAX_CONCURRENT_DENSE)

# Residual above which a dense eigendecomposition is reported as suspect
DENSE_RESIDUAL_TOL = 1e-8


def set_dense_concurrency(limit: int) -> None:
    """Change how many dense materializations may run at once"""
    global _dense_slots
    if limit < 1:
        raise ValueError("dense concurrency limit must be positive")
    _dense_slots = threading.BoundedSemaphore(limit)


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """An N x N complex matrix"""

    entries: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def adjoint(self) -> "DenseOperator":
        return DenseOperator(self.entries.conj().T)

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.entries @ other.entries)

    def is_unitary(self, tol: float = 1e-10) -> bool:
        gram = self.entries.conj().T @ self.entries
        return bool(np.max(np.abs(gram - np.eye(self.dim))) <= tol)

    def is_normal(self, tol: float = NORMALITY_TOL) -> bool:
        a = self.entries
        commutator = a @ a.conj().T - a.conj().T @ a
        scale = max(1.0, float(np.max(np.abs(a))) ** 2)
        return bool(np.max(np.abs(commutator)) <= tol * scale)


def materialize(op: object, max_dense: int = MAX_DENSE_DIM) -> DenseOperator:
    """Dense form of anything with to_matrix() (or an array)

    Raises:
        DenseGuardError: N exceeds max_dense
    """
    dim = op.shape[0] if isinstance(op, np.ndarray) else op.dim
    if dim > max_dense:
        raise DenseGuardError(
            f"refusing to materialize N={dim} above the dense guard {max_dense}; "
            "use the structured path or raise --max-dense"
        )
    with _dense_slots:
        if isinstance(op, np.ndarray):
            entries = np.array(op, dtype=np.complex128)
        else:
            entries = np.asarray(op.to_matrix(), dtype=np.complex128)
    return DenseOperator(entries)


def dense_dft_matrix(n: int) -> DenseOperator:
    """F[P, Q] = N^{-1/2} e_N(-PQ) built entry by entry"""
    rows = np.arange(n)
    products = np.mod(np.outer(rows, rows), n)
    return DenseOperator(np.exp(-2j * np.pi * products / n) / np.sqrt(n))


def dense_eig(a: DenseOperator) -> EigenBasis:
    """Eigenbasis of a normal matrix via the complex Schur form

    Columns are scaled to the weighted norm of H_N and ordered by eigenvalue
    angle in [0, 2 pi).
    """
    if not a.is_normal():
        raise NonNormalError("dense_eig needs a normal (e.g. unitary) matrix")
    schur_form, schur_vectors = scipy.linalg.schur(a.entries, output="complex")
    values = np.diag(schur_form)
    order = np.argsort(np.mod(np.angle(values), 2 * np.pi), kind="stable")
    values = values[order]
    vectors = schur_vectors[:, order] * np.sqrt(a.dim)

    residual = np.max(np.abs(a.entries @ vectors - vectors * values)) / np.sqrt(a.dim)
    if residual > DENSE_RESIDUAL_TOL:
        logger.warning(f"Dense eigendecomposition residual {residual:.2e} at N={a.dim}")
    return EigenBasis(vectors, values)


def eigenprojectors(
    basis: EigenBasis, tol: float = EIGENVALUE_CLUSTER_TOL
) -> list[tuple[complex, np.ndarray]]:
    """(eigenvalue, projector) per cluster of nearly equal eigenvalues"""
    angles = np.mod(np.angle(basis.eigenvalues), 2 * np.pi)
    order = np.argsort(angles, kind="stable")
    values = basis.eigenvalues
    clusters: list[list[int]] = []
    for j in order:
        previous = clusters[-1][-1] if clusters else None
        if previous is not None and abs(values[j] - values[previous]) <= tol:
            clusters[-1].append(int(j))
        else:
            clusters.append([int(j)])
    # angle 0 and 2 pi meet
    if len(clusters) > 1:
        first, last = clusters[0][0], clusters[-1][-1]
        if abs(basis.eigenvalues[first] - basis.eigenvalues[last]) <= tol:
            clusters[0] = clusters.pop() + clusters[0]
    return [
        (complex(basis.eigenvalues[c[0]]), basis.projector(c)) for c in clusters
    ]


def operator_norm(
    a: DenseOperator,
    seed: int = 0,
    tol: float = POWER_ITERATION_TOL,
    max_iter: int = POWER_ITERATION_MAX_ITER,
) -> float:
    """Largest singular value by power iteration on A*A, one seeded restart"""
    gram = a.entries.conj().T @ a.entries
    if not np.any(gram):
        return 0.0
    best = 0.0
    for attempt in range(2):
        rng = np.random.default_rng(seed + attempt)
        v = rng.standard_normal(a.dim) + 1j * rng.standard_normal(a.dim)
        v /= np.linalg.norm(v)
        estimate = 0.0
        for _ in range(max_iter):
            w = gram @ v
            rayleigh = float(np.real(np.vdot(v, w)))
            norm = np.linalg.norm(w)
            if norm == 0.0:
                break
            v = w / norm
            if abs(rayleigh - estimate) <= tol * max(rayleigh, np.finfo(float).tiny):
                estimate = rayleigh
                break
            estimate = rayleigh
        best = max(best, estimate)
    return float(np.sqrt(max(best, 0.0)))


def jacobi_singular_values(
    a: DenseOperator | np.ndarray,
    tol: float = JACOBI_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> np.ndarray:
    """Singular values by one-sided (Hestenes) Jacobi rotations, descending"""
    source = a.entries if isinstance(a, DenseOperator) else a
    cols = np.array(source, dtype=np.complex128)
    k = cols.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for i in range(k - 1):
            for j in range(i + 1, k):
                x, y = cols[:, i], cols[:, j]
                alpha = float(np.real(np.vdot(x, x)))
                beta = float(np.real(np.vdot(y, y)))
                gamma = complex(np.vdot(x, y))
                if abs(gamma) <= tol * np.sqrt(alpha * beta) or abs(gamma) == 0.0:
                    continue
                rotated = True
                phase = gamma / abs(gamma)
                y = y / phase
                zeta = (beta - alpha) / (2 * abs(gamma))
                sign = 1.0 if zeta >= 0 else -1.0
                t = sign / (abs(zeta) + np.sqrt(1 + zeta * zeta))
                c = 1 / np.sqrt(1 + t * t)
                s = c * t
                cols[:, i], cols[:, j] = c * x - s * y, s * x + c * y
        if not rotated:
            break
    return np.sort(np.linalg.norm(cols, axis=0))[::-1]
