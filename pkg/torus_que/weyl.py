"""
Weyl - Exact Weyl-Heisenberg translation operators over Z/NZ

Every operator here is monomial: (A psi)(Q) = phase[Q] * psi(sigma(Q)) with
sigma a permutation and each phase of the form e^{i pi k / D}. Phases are
stored as integer numerators over one common denominator so that products
and adjoints are exact; floating point only appears when a phase table is
turned into complex numbers.

The Weyl operator of frequency n = (n1, n2) acts as

    T_N(n) psi(Q) = e^{i pi n1 n2 / N} e_N(n2 Q) psi(Q + n1)

and obeys T_N(m) T_N(n) = e^{i pi omega(m, n) / N} T_N(m + n) with
omega(m, n) = m1 n2 - m2 n1. T_N is not N-periodic in n:
T_N(n1 + N, n2) = (-1)^{n2} T_N(n1, n2), so frequencies are never reduced.

Fourier conjugation with the kernel of hilbert.dft reads
dft . t1 . inverse_dft = t2 and dft . t2 . inverse_dft = t1^{-1}.
"""

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np
import scipy.linalg

from torus_que.errors import CommutationError, DimensionMismatchError
from torus_que.hilbert import StateVector
from torus_que.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ExactPhase:
    """The unimodular number e^{i pi r} with r = numerator/denominator mod 2

    Stored in lowest terms with 0 <= numerator < 2 * denominator.
    """

    numerator: int
    denominator: int = 1

    def __post_init__(self) -> None:
        if self.denominator <= 0:
            raise ValueError("phase denominator must be positive")
        r = Fraction(self.numerator, self.denominator) % 2
        object.__setattr__(self, "numerator", r.numerator)
        object.__setattr__(self, "denominator", r.denominator)

    @classmethod
    def from_fraction(cls, r: Fraction) -> "ExactPhase":
        return cls(r.numerator, r.denominator)

    @classmethod
    def one(cls) -> "ExactPhase":
        return cls(0, 1)

    @property
    def exponent(self) -> Fraction:
        """r in [0, 2) with phase = e^{i pi r}"""
        return Fraction(self.numerator, self.denominator)

    def __mul__(self, other: "ExactPhase") -> "ExactPhase":
        return ExactPhase.from_fraction(self.exponent + other.exponent)

    def __pow__(self, k: int) -> "ExactPhase":
        return ExactPhase.from_fraction(self.exponent * k)

    def conjugate(self) -> "ExactPhase":
        return ExactPhase.from_fraction(-self.exponent)

    def angle(self) -> float:
        """Argument in [0, 2 pi)"""
        return math.pi * self.numerator / self.denominator

    def to_complex(self) -> complex:
        # fold to [-1, 1) so the float argument stays small
        r = self.exponent
        if r >= 1:
            r -= 2
        return cmath.exp(1j * math.pi * float(r))


def e_n(x: Fraction | int, n: int) -> ExactPhase:
    """e_N(x) = e^{2 pi i x / N} as an exact phase"""
    return ExactPhase.from_fraction(Fraction(2 * x, n) if n else Fraction(0))


class WeylIndex(NamedTuple):
    """Frequency vector n = (n1, n2)"""

    n1: int
    n2: int

    def plus(self, other: "WeylIndex") -> "WeylIndex":
        return WeylIndex(self.n1 + other[0], self.n2 + other[1])

    def negated(self) -> "WeylIndex":
        return WeylIndex(-self.n1, -self.n2)

    def sup_norm(self) -> int:
        return max(abs(self.n1), abs(self.n2))


def omega(m: tuple[int, int], n: tuple[int, int]) -> int:
    """Symplectic form m1 n2 - m2 n1"""
    return m[0] * n[1] - m[1] * n[0]


@dataclass(frozen=True, eq=False)
class MonomialOperator:
    """(A psi)(Q) = e^{i pi numerators[Q] / denominator} psi(target[Q])

    Instances are normalized on construction (numerators reduced mod
    2 * denominator, common factors removed), so equality is structural.
    """

    target: np.ndarray
    numerators: np.ndarray
    denominator: int = 1

    def __post_init__(self) -> None:
        target = np.array(self.target, dtype=np.int64).reshape(-1)
        numerators = np.array(self.numerators, dtype=np.int64).reshape(-1)
        if target.size != numerators.size or target.size == 0:
            raise ValueError("target and phase tables must share a positive length")
        if not np.array_equal(np.sort(target), np.arange(target.size)):
            raise ValueError("target table is not a permutation")
        den = int(self.denominator)
        if den <= 0:
            raise ValueError("phase denominator must be positive")
        numerators = np.mod(numerators, 2 * den)
        g = math.gcd(den, int(np.gcd.reduce(numerators)))
        if g > 1:
            den //= g
            numerators //= g
        target.setflags(write=False)
        numerators.setflags(write=False)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "numerators", numerators)
        object.__setattr__(self, "denominator", den)

    @property
    def dim(self) -> int:
        return int(self.target.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MonomialOperator):
            return NotImplemented
        return (
            self.denominator == other.denominator
            and np.array_equal(self.target, other.target)
            and np.array_equal(self.numerators, other.numerators)
        )

    __hash__ = None  # type: ignore[assignment]

    def phase(self, q: int) -> ExactPhase:
        return ExactPhase(int(self.numerators[q % self.dim]), self.denominator)

    def phase_values(self) -> np.ndarray:
        return np.exp(1j * np.pi * self.numerators / self.denominator)

    def times_phase(self, phase: ExactPhase) -> "MonomialOperator":
        """Scalar multiple phase * A"""
        den = math.lcm(self.denominator, phase.denominator)
        nums = self.numerators * (den // self.denominator) + phase.numerator * (
            den // phase.denominator
        )
        return MonomialOperator(self.target, nums, den)

    def apply(self, psi: StateVector) -> StateVector:
        if psi.dim != self.dim:
            raise DimensionMismatchError(self.dim, psi.dim)
        return StateVector(self.phase_values() * psi.entries[self.target])

    def apply_columns(self, block: np.ndarray) -> np.ndarray:
        """Apply to every column of an N x k block"""
        if block.shape[0] != self.dim:
            raise DimensionMismatchError(self.dim, block.shape[0])
        return self.phase_values()[:, None] * block[self.target, :]

    def to_matrix(self) -> np.ndarray:
        matrix = np.zeros((self.dim, self.dim), dtype=np.complex128)
        matrix[np.arange(self.dim), self.target] = self.phase_values()
        return matrix

    def cycles(self) -> list[np.ndarray]:
        """Cycles of the permutation, each starting at its smallest index"""
        seen = np.zeros(self.dim, dtype=bool)
        found = []
        for base in range(self.dim):
            if seen[base]:
                continue
            cycle = [base]
            seen[base] = True
            nxt = int(self.target[base])
            while nxt != base:
                cycle.append(nxt)
                seen[nxt] = True
                nxt = int(self.target[nxt])
            found.append(np.array(cycle, dtype=np.int64))
        return found


def identity(n: int) -> MonomialOperator:
    return MonomialOperator(np.arange(n), np.zeros(n, dtype=np.int64), 1)


def weyl_operator(n: tuple[int, int], dim: int) -> MonomialOperator:
    """T_N(n) with exact phases e^{i pi (n1 n2 + 2 n2 Q) / N}"""
    if dim < 1:
        raise ValueError(f"N must be positive, got {dim}")
    n1, n2 = int(n[0]), int(n[1])
    q = np.arange(dim, dtype=np.int64)
    # reduce in Python first; n may be a huge integer
    offset = (n1 * n2) % (2 * dim)
    slope = n2 % dim
    numerators = (offset + 2 * slope * q) % (2 * dim)
    target = (q + n1 % dim) % dim
    return MonomialOperator(target, numerators, dim)


def compose(a: MonomialOperator, b: MonomialOperator) -> MonomialOperator:
    """Operator product a . b"""
    if a.dim != b.dim:
        raise DimensionMismatchError(a.dim, b.dim)
    den = math.lcm(a.denominator, b.denominator)
    nums = a.numerators * (den // a.denominator) + b.numerators[a.target] * (
        den // b.denominator
    )
    return MonomialOperator(b.target[a.target], nums, den)


def adjoint(a: MonomialOperator) -> MonomialOperator:
    inverse = np.argsort(a.target)
    return MonomialOperator(inverse, -a.numerators[inverse], a.denominator)


def power(a: MonomialOperator, k: int) -> MonomialOperator:
    """a^k by repeated squaring; negative k uses the adjoint"""
    base = adjoint(a) if k < 0 else a
    k = abs(k)
    result = identity(a.dim)
    while k:
        if k & 1:
            result = compose(result, base)
        base = compose(base, base)
        k >>= 1
    return result


def commutes(a: MonomialOperator, b: MonomialOperator) -> bool:
    return compose(a, b) == compose(b, a)


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """Orthonormal eigenbasis stored column-wise

    Attributes:
        vectors: N x N complex array; column j is v_j with (1/N)|v_j|^2 = 1
        eigenvalues: unimodular eigenvalues of the operator the basis came from
        phases: exact eigenvalues when known
        joint_eigenvalues: eigenvalues of the second operator of a joint basis
    """

    vectors: np.ndarray
    eigenvalues: np.ndarray
    phases: tuple[ExactPhase, ...] | None = None
    joint_eigenvalues: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[0])

    def __len__(self) -> int:
        return int(self.vectors.shape[1])

    def state(self, j: int) -> StateVector:
        return StateVector(self.vectors[:, j])

    def gram(self) -> np.ndarray:
        """Matrix of weighted inner products <v_k, v_j>"""
        return self.vectors.conj().T @ self.vectors / self.dim

    def projector(self, columns: list[int] | np.ndarray) -> np.ndarray:
        """Dense orthogonal projector onto span{v_j : j in columns}"""
        block = self.vectors[:, columns]
        return block @ block.conj().T / self.dim

    def residual(self, op: MonomialOperator) -> float:
        """max_j ||A v_j - lambda_j v_j|| in the weighted norm"""
        diff = op.apply_columns(self.vectors) - self.vectors * self.eigenvalues
        return float(np.sqrt(np.max(np.sum(np.abs(diff) ** 2, axis=0)) / self.dim))

    def transported(self, vectors: np.ndarray) -> "EigenBasis":
        """Same eigenvalues attached to new vectors"""
        return EigenBasis(
            vectors, self.eigenvalues, self.phases, self.joint_eigenvalues
        )


def eigenbasis_monomial(a: MonomialOperator) -> EigenBasis:
    """Structured eigenbasis from the cycle decomposition of a

    On a cycle Q_0 -> Q_1 -> ... -> Q_{L-1} -> Q_0 with phase product
    e^{i pi s / D}, the eigenvalues are the L-th roots e^{i pi (s + 2Dm)/(LD)}
    and v(Q_j) = lambda^j / prod_{i<j} phase[Q_i]. Columns are ordered by
    eigenvalue angle in [0, 2 pi), ties by the cycle's smallest index.
    """
    n = a.dim
    den = a.denominator
    entries: list[tuple[Fraction, int, int, int]] = []
    cycle_data = []
    for idx, cycle in enumerate(a.cycles()):
        length = int(cycle.size)
        ks = a.numerators[cycle]
        s = int(ks.sum()) % (2 * den)
        prefix = np.concatenate(([0], np.cumsum(ks)[:-1])) % (2 * den)
        cycle_data.append((cycle, length, s, prefix))
        modulus = 2 * length * den
        for m in range(length):
            r = Fraction((s + 2 * den * m) % modulus, length * den)
            entries.append((r, int(cycle[0]), idx, m))

    entries.sort(key=lambda item: (item[0], item[1]))

    vectors = np.zeros((n, n), dtype=np.complex128)
    eigenvalues = np.empty(n, dtype=np.complex128)
    phases = []
    for col, (r, _, idx, m) in enumerate(entries):
        cycle, length, s, prefix = cycle_data[idx]
        modulus = 2 * length * den
        j = np.arange(length, dtype=np.int64)
        # j*(s + 2Dm) mod 2LD; only j*m mod L matters in the 2Dm part
        exps = (j * s + 2 * den * ((j * m) % length) - length * prefix) % modulus
        vectors[cycle, col] = np.sqrt(n / length) * np.exp(
            1j * np.pi * exps / (length * den)
        )
        phase = ExactPhase.from_fraction(r)
        phases.append(phase)
        eigenvalues[col] = phase.to_complex()

    logger.debug(f"Structured eigenbasis: N={n}, {len(cycle_data)} cycles")
    return EigenBasis(vectors, eigenvalues, tuple(phases))


def _degenerate_groups(phases: tuple[ExactPhase, ...]) -> list[list[int]]:
    groups: list[list[int]] = []
    for j, phase in enumerate(phases):
        if groups and phases[groups[-1][0]] == phase:
            groups[-1].append(j)
        else:
            groups.append([j])
    return groups


def joint_eigenbasis(a: MonomialOperator, b: MonomialOperator) -> EigenBasis:
    """Orthonormal basis diagonalizing the commuting pair (a, b)

    The structured basis of a is refined inside each degenerate eigenspace by
    a complex Schur decomposition of the (normal) restriction of b.
    """
    if a.dim != b.dim:
        raise DimensionMismatchError(a.dim, b.dim)
    if not commutes(a, b):
        raise CommutationError("operators do not commute; no joint eigenbasis")

    basis = eigenbasis_monomial(a)
    n = basis.dim
    vectors = basis.vectors.copy()
    second = np.empty(n, dtype=np.complex128)
    for group in _degenerate_groups(basis.phases):
        block = vectors[:, group]
        restricted = block.conj().T @ b.apply_columns(block) / n
        if len(group) == 1:
            second[group[0]] = restricted[0, 0]
            continue
        schur_form, schur_vectors = scipy.linalg.schur(restricted, output="complex")
        values = np.diag(schur_form)
        order = np.argsort(np.mod(np.angle(values), 2 * np.pi), kind="stable")
        vectors[:, group] = block @ schur_vectors[:, order]
        second[group] = values[order]

    return EigenBasis(vectors, basis.eigenvalues, basis.phases, second)
