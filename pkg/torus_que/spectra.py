"""
Spectra - Matrix elements, QUE remainders and rate fits

The remainder of an observable f at level N is the largest deviation
|<Op_N(f) psi_j, psi_j> - f_hat(0, 0)| over the canonical eigenbasis of a
propagator. Values at or below EXACT_ZERO_CLAMP are reported as exact zero;
the raw value stays on the profile for debugging.
"""

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.stats

from torus_que.constants import (
    EXACT_ZERO_CLAMP,
    MIN_FIT_ROWS,
    SWEEP_CSV_HEADER,
    UNNORMALIZED_REJECT_TOL,
)
from torus_que.diophantine import RealTarget, best_approx
from torus_que.errors import DimensionMismatchError, UnnormalizedStateError
from torus_que.hilbert import StateVector, inner
from torus_que.logger import get_logger
from torus_que.observables import (
    QuantizedObservable,
    SmoothTruncation,
    TrigPolynomial,
    as_polynomial,
    quantize,
    tail_of,
)
from torus_que.propagators import Propagator, eigenbasis
from torus_que.weyl import EigenBasis, WeylIndex

logger = get_logger(__name__)


def matrix_element(opsum: QuantizedObservable, psi: StateVector) -> complex:
    """sum_n f_hat(n) <T_N(n) psi, psi>, one monomial at a time"""
    if psi.dim != opsum.dim:
        raise DimensionMismatchError(opsum.dim, psi.dim)
    if abs(psi.norm_squared() - 1.0) > UNNORMALIZED_REJECT_TOL:
        raise UnnormalizedStateError(
            f"state has norm^2 {psi.norm_squared():.3e}; normalize it first"
        )
    return sum((c * inner(op.apply(psi), psi) for c, op in opsum.terms), 0j)


@dataclass(frozen=True)
class RemainderProfile:
    """Deviations of the diagonal matrix elements from the mean

    Attributes:
        max: largest deviation, clamped to 0 at or below EXACT_ZERO_CLAMP
        mean: basis-averaged deviation, clamped the same way
        raw_max: unclamped largest deviation
        tail: certified tail of a smooth observable (not included above)
    """

    max: float
    mean: float
    raw_max: float
    tail: float = 0.0

    @property
    def exact_zero(self) -> bool:
        return self.max == 0.0

    @property
    def bound(self) -> float:
        return self.max + self.tail


def _clamp(x: float) -> float:
    return 0.0 if x <= EXACT_ZERO_CLAMP else x


def remainder_profile(
    basis: EigenBasis, f: TrigPolynomial | SmoothTruncation
) -> RemainderProfile:
    poly = as_polynomial(f)
    op = quantize(poly, basis.dim)
    deviations = np.abs(op.diagonal_elements(basis.vectors) - poly.mean())
    raw = float(np.max(deviations)) if deviations.size else 0.0
    return RemainderProfile(
        _clamp(raw), _clamp(float(np.mean(deviations))), raw, tail_of(f)
    )


def que_remainder(
    prop: Propagator,
    f: TrigPolynomial | SmoothTruncation,
    basis: EigenBasis | None = None,
) -> float:
    """Max remainder over the canonical eigenbasis plus any certified tail"""
    if basis is None:
        basis = eigenbasis(prop)
    return remainder_profile(basis, f).bound


def resonant_set(
    a: tuple[int, int], n: int, radius: int, include_zero: bool = True
) -> list[WeylIndex]:
    """All k with ||k||_inf <= radius and k1 a1 + k2 a2 = 0 mod N"""
    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    k1, k2 = np.meshgrid(axis, axis, indexing="ij")
    residues = (k1 * (a[0] % n) + k2 * (a[1] % n)) % n
    hits = np.argwhere(residues == 0)
    result = [WeylIndex(int(axis[i]), int(axis[j])) for i, j in hits]
    if not include_zero:
        result = [k for k in result if k != (0, 0)]
    return sorted(result)


def resonant_count(a: tuple[int, int], n: int, f: TrigPolynomial) -> int:
    """Nonconstant frequencies of f that are resonant at level N"""
    return sum(
        1
        for k in f.coeffs
        if k != (0, 0) and (k.n1 * a[0] + k.n2 * a[1]) % n == 0
    )


def vanishing_threshold(
    alpha: Sequence[RealTarget], k: tuple[int, int], dims: Iterable[int]
) -> int | None:
    """First N in dims from which k stays non-resonant for the rest of dims

    None when the last N in dims is itself resonant.
    """
    dims = sorted(dims)
    threshold = dims[0] if dims else None
    for n in dims:
        a = best_approx(alpha, n)
        if (k[0] * a[0] + k[1] * a[1]) % n == 0:
            threshold = None
        elif threshold is None:
            threshold = n
    return threshold


@dataclass(frozen=True)
class SweepRow:
    """One level of a matrix-element sweep"""

    n: int
    a: tuple[int, int]
    remainder_max: float
    remainder_mean: float
    resonant_count: int
    seconds: float = 0.0
    raw_max: float = 0.0
    tail: float = 0.0

    @property
    def exact_zero(self) -> bool:
        return self.remainder_max == 0.0

    def to_csv_row(self) -> list[str]:
        return [
            str(self.n),
            str(self.a[0]),
            str(self.a[1]),
            repr(self.remainder_max),
            repr(self.remainder_mean),
            str(int(self.exact_zero)),
            str(self.resonant_count),
            repr(self.seconds),
        ]


@dataclass
class MatrixElementSweep:
    """Remainders of one observable for one alpha across a schedule of N"""

    alpha: str
    observable: str
    rows: list[SweepRow] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.rows = sorted(self.rows, key=lambda r: r.n)

    def add(self, row: SweepRow) -> None:
        self.rows.append(row)
        self.rows.sort(key=lambda r: r.n)

    @property
    def dims(self) -> list[int]:
        return [r.n for r in self.rows]

    def exact_zero_threshold(self) -> int | None:
        """First N from which every remaining row is an exact zero"""
        threshold = None
        for row in self.rows:
            if not row.exact_zero:
                threshold = None
            elif threshold is None:
                threshold = row.n
        return threshold

    def csv_header(self) -> list[str]:
        return list(SWEEP_CSV_HEADER)

    def csv_rows(self) -> list[list[str]]:
        return [row.to_csv_row() for row in self.rows]


def sweep_row(
    prop: Propagator,
    f: TrigPolynomial | SmoothTruncation,
    basis: EigenBasis | None = None,
    seconds: float = 0.0,
) -> SweepRow:
    """Measure one level; a is taken from the Kronecker part of prop"""
    if basis is None:
        basis = eigenbasis(prop)
    profile = remainder_profile(basis, f)
    kron = getattr(prop, "kron", prop)
    a = getattr(kron, "a", (0, 0))
    return SweepRow(
        n=prop.dim,
        a=tuple(a),
        remainder_max=profile.max,
        remainder_mean=profile.mean,
        resonant_count=resonant_count(a, prop.dim, as_polynomial(f)),
        seconds=seconds,
        raw_max=profile.raw_max,
        tail=profile.tail,
    )


@dataclass(frozen=True)
class RateFit:
    """log(remainder) = slope * log(N) + intercept"""

    slope: float
    intercept: float
    r_squared: float
    points: int
    exact_vanishing_count: int = 0

    @property
    def constant(self) -> float:
        return math.exp(self.intercept)


@dataclass(frozen=True)
class ExactVanishingReport:
    """Every row vanished exactly, so there is nothing to fit"""

    exact_vanishing_count: int


def rate_fit(
    rows: MatrixElementSweep | Sequence[SweepRow] | Sequence[tuple[int, float]],
    column: str = "remainder_max",
) -> RateFit | ExactVanishingReport:
    """Least-squares slope of log(remainder) against log(N)

    Rows may be SweepRows (the column is read from each) or (N, value) pairs.
    """
    if isinstance(rows, MatrixElementSweep):
        rows = rows.rows
    pairs = [
        (r.n, getattr(r, column)) if isinstance(r, SweepRow) else (r[0], r[1])
        for r in rows
    ]
    positive = [(n, v) for n, v in pairs if v > 0]
    zeros = len(pairs) - len(positive)
    if not positive:
        return ExactVanishingReport(zeros)
    if len(positive) < MIN_FIT_ROWS:
        raise ValueError(
            f"rate fit needs at least {MIN_FIT_ROWS} positive rows, got {len(positive)}"
        )
    xs = np.log([n for n, _ in positive])
    ys = np.log([v for _, v in positive])
    result = scipy.stats.linregress(xs, ys)
    fit = RateFit(
        float(result.slope),
        float(result.intercept),
        float(result.rvalue**2),
        len(positive),
        zeros,
    )
    logger.debug(
        f"Rate fit over {fit.points} rows: "
        f"slope={fit.slope:.3f} R2={fit.r_squared:.3f}"
    )
    return fit


def rate_fit_windows(
    rows: MatrixElementSweep | Sequence[SweepRow],
    window: int = MIN_FIT_ROWS,
    column: str = "remainder_max",
) -> list[tuple[int, int, RateFit | ExactVanishingReport]]:
    """Fits over every sliding window of consecutive rows, as (N_first, N_last, fit)"""
    if isinstance(rows, MatrixElementSweep):
        rows = rows.rows
    rows = list(rows)
    results = []
    for start in range(0, len(rows) - window + 1):
        chunk = rows[start : start + window]
        try:
            fit = rate_fit(chunk, column)
        except ValueError:
            continue
        results.append((chunk[0].n, chunk[-1].n, fit))
    return results
