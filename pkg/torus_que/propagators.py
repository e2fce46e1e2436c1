"""
Propagators - Quantizations of Kronecker and perturbed Kronecker maps

A propagator is a unitary on H_N acting on N x k blocks of column states.
The Kronecker propagator is the Weyl monomial T_N(-a2, a1) for the best
approximation a/N of alpha and satisfies exact Egorov for the rational
translation. The shear q -> q + W'(p) is quantized as a multiplication in
the momentum representation,

    U_W = dft^{-1} diag(e(sign * N * W(P/N))) dft,

with the sign fixed by calibrate_sign. The perturbed propagator is
U_h^{-1} U_tau U_h where U_h quantizes the inverse of q -> q + h(p) and h
solves the cocycle equation h(p + alpha_1) - h(p) = V(p).
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cache

import mpmath
import numpy as np

from torus_que import oracle
from torus_que.constants import (
    CALIBRATED_SHEAR_SIGN,
    CALIBRATION_MONOMIAL,
    CALIBRATION_SLOPE,
    CONJUGATION_GRID_SIZE,
    DEFAULT_CALIBRATION_N,
    DIOPHANTINE_CHECK_GAMMA,
    DIOPHANTINE_CHECK_N_MAX,
    DIOPHANTINE_WARN_CONSTANT,
    EXACT_ZERO_CLAMP,
    MAX_DENSE_DIM,
    MIN_WORKING_BITS,
)
from torus_que.diophantine import RealTarget, best_approx, diophantine_scan
from torus_que.errors import (
    CalibrationError,
    DimensionMismatchError,
    ObservableError,
)
from torus_que.hilbert import StateVector, dft_columns, inverse_dft_columns
from torus_que.logger import get_logger
from torus_que.observables import (
    SmoothTruncation,
    TrigPolynomial,
    as_polynomial,
    compose_shear,
    quantize,
    tail_of,
)
from torus_que.weyl import (
    EigenBasis,
    MonomialOperator,
    WeylIndex,
    adjoint,
    eigenbasis_monomial,
    weyl_operator,
)

logger = get_logger(__name__)

# Imaginary parts of a real shear profile are allowed up to this size
REAL_PROFILE_TOL = 1e-9


class Propagator:
    """Base class: a unitary on H_N applied column-wise

    Subclasses implement apply_columns and inverse_apply_columns.
    """

    dim: int

    def apply_columns(self, block: np.ndarray) -> np.ndarray:
        raise NotImplementedError("Subclasses must implement apply_columns()")

    def inverse_apply_columns(self, block: np.ndarray) -> np.ndarray:
        raise NotImplementedError("Subclasses must implement inverse_apply_columns()")

    def _check_block(self, block: np.ndarray) -> None:
        if block.shape[0] != self.dim:
            raise DimensionMismatchError(self.dim, block.shape[0])

    def apply(self, psi: StateVector) -> StateVector:
        return StateVector(self.apply_columns(psi.entries[:, None])[:, 0])

    def to_matrix(self) -> np.ndarray:
        return self.apply_columns(np.eye(self.dim, dtype=np.complex128))

    def inverse(self) -> "Propagator":
        return InversePropagator(self)


@dataclass(frozen=True, eq=False)
class InversePropagator(Propagator):
    base: Propagator

    @property
    def dim(self) -> int:
        return self.base.dim

    def apply_columns(self, block: np.ndarray) -> np.ndarray:
        return self.base.inverse_apply_columns(block)

    def inverse_apply_columns(self, block: np.ndarray) -> np.ndarray:
        return self.base.apply_columns(block)

    def inverse(self) -> Propagator:
        return self.base


@dataclass(frozen=True, eq=False)
class MonomialPropagator(Propagator):
    """A Weyl monomial used as a propagator"""

    operator: MonomialOperator

    @property
    def dim(self) -> int:
        return self.operator.dim

    def apply_columns(self, block: np.ndarray) -> np.ndarray:
        self._check_block(block)
        return self.operator.apply_columns(block)

    def inverse_apply_columns(self, block: np.ndarray) -> np.ndarray:
        self._check_block(block)
        return adjoint(self.operator).apply_columns(block)

    def to_matrix(self) -> np.ndarray:
        return self.operator.to_matrix()


@dataclass(frozen=True, eq=False)
class KroneckerPropagator(MonomialPropagator):
    """U_N(tau_alpha) = T_N(-a2, a1) with a = best_approx(alpha, N)"""

    a: tuple[int, int] = (0, 0)


def kronecker(alpha: Sequence[RealTarget], n: int) -> KroneckerPropagator:
    a1, a2 = best_approx(alpha, n)
    return KroneckerPropagator(weyl_operator((-a2, a1), n), (a1, a2))


def kronecker_egorov_bound(
    f: TrigPolynomial | SmoothTruncation, alpha: Sequence[RealTarget], n: int
) -> float:
    """Bound on ||U^-1 Op_N(f) U - Op_N(f . tau_alpha)|| for the Kronecker propagator

    2 pi max_i |alpha_i - a_i/N| sum ||n||_1 |f_hat(n)|, plus twice the tail
    of a smooth observable.
    """
    a = best_approx(alpha, n)
    with mpmath.workprec(MIN_WORKING_BITS * 2):
        delta = max(
            abs(t.evaluate(MIN_WORKING_BITS * 2) - mpmath.mpf(ai) / n)
            for t, ai in zip(alpha, a, strict=True)
        )
    poly = as_polynomial(f)
    weight = sum((abs(k.n1) + abs(k.n2)) * abs(c) for k, c in poly.items())
    return float(2 * np.pi * float(delta) * weight + 2 * tail_of(f))


# =============================================================================
# Shear and the cocycle solution
# =============================================================================


def antiderivative(v: TrigPolynomial) -> TrigPolynomial:
    """Mean-zero W with W' = V; V must be mean-zero and p-only"""
    return v.antiderivative_p()


@dataclass(frozen=True, eq=False)
class ShearPropagator(Propagator):
    """Momentum-diagonal unitary with entries e(sign * N * W(P/N))"""

    dim: int
    profile: TrigPolynomial
    sign: int
    diagonal: np.ndarray = field(repr=False)

    @property
    def is_identity(self) -> bool:
        return not self.profile.coeffs

    def apply_columns(self, block: np.ndarray) -> np.ndarray:
        self._check_block(block)
        if self.is_identity:
            return np.array(block, dtype=np.complex128)
        return inverse_dft_columns(self.diagonal[:, None] * dft_columns(block))

    def inverse_apply_columns(self, block: np.ndarray) -> np.ndarray:
        self._check_block(block)
        if self.is_identity:
            return np.array(block, dtype=np.complex128)
        return inverse_dft_columns(self.diagonal.conj()[:, None] * dft_columns(block))


def shear(
    w: TrigPolynomial, n: int, sign: int = CALIBRATED_SHEAR_SIGN
) -> ShearPropagator:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if w.depends_on_q():
        raise ObservableError("shear antiderivative must depend on p only")
    if abs(w.mean()) > 0:
        raise ObservableError("shear antiderivative must have mean zero")
    if not w.is_real(REAL_PROFILE_TOL):
        raise ObservableError("shear antiderivative must be real-valued")
    momenta = np.arange(n) / n
    phase = sign * n * np.real(w.evaluate(momenta))
    diagonal = np.exp(2j * np.pi * np.mod(phase, 1.0))
    diagonal.setflags(write=False)
    return ShearPropagator(n, w, sign, diagonal)


def h_series(
    v: TrigPolynomial | SmoothTruncation,
    alpha1: RealTarget,
    truncation: int | None = None,
) -> SmoothTruncation:
    """h = sum_{0<|k|<=K} V_hat(k) e(kp) / (e(k alpha_1) - 1)

    The returned tail_bound bounds the sup-norm residual of the cocycle
    equation left by the terms of V beyond K (and V's own tail).
    """
    poly = as_polynomial(v)
    if poly.depends_on_q():
        raise ObservableError("V must depend on p only")
    if abs(poly.mean()) > 0:
        raise ObservableError("V must have mean zero")
    if alpha1.is_rational:
        raise ObservableError(
            f"alpha_1 = {alpha1.to_spec()} is rational; the cocycle divisor vanishes"
        )
    if truncation is None:
        truncation = poly.support_radius()

    bits = MIN_WORKING_BITS * 2
    terms: dict[WeylIndex, complex] = {}
    dropped = 0.0
    with mpmath.workprec(bits):
        a = alpha1.evaluate(bits)
        for k, c in poly.items():
            if abs(k.n1) > truncation:
                dropped += abs(c)
                continue
            x = k.n1 * a
            divisor = mpmath.expjpi(2 * (x - mpmath.floor(x))) - 1
            terms[k] = complex(mpmath.mpc(c) / divisor)
    h = TrigPolynomial(terms)
    logger.debug(f"h_series: {len(h)} terms, K={truncation}, dropped={dropped:.3e}")
    return SmoothTruncation(h, truncation, dropped + tail_of(v))


@cache
def _diophantine_constant(spec: str) -> float:
    report = diophantine_scan(
        [RealTarget.parse(spec)], DIOPHANTINE_CHECK_GAMMA, DIOPHANTINE_CHECK_N_MAX
    )
    return report.c_estimate


def check_diophantine(alpha1: RealTarget) -> bool:
    """Warn when a finite scan suggests alpha_1 is badly approximable by rationals"""
    c = _diophantine_constant(alpha1.to_spec())
    if c < DIOPHANTINE_WARN_CONSTANT:
        logger.warning(
            f"alpha_1 = {alpha1.to_spec()} looks non-diophantine "
            f"(c ~ {c:.2e} at gamma={DIOPHANTINE_CHECK_GAMMA}); "
            "the conjugating function may be large"
        )
        return False
    return True


@dataclass(frozen=True, eq=False)
class PerturbedPropagator(Propagator):
    """U_N = U_h^-1 U_tau U_h, components kept for eigenbasis transport"""

    kron: KroneckerPropagator
    conj: ShearPropagator
    h: SmoothTruncation

    @property
    def dim(self) -> int:
        return self.kron.dim

    def apply_columns(self, block: np.ndarray) -> np.ndarray:
        return self.conj.inverse_apply_columns(
            self.kron.apply_columns(self.conj.apply_columns(block))
        )

    def inverse_apply_columns(self, block: np.ndarray) -> np.ndarray:
        return self.conj.inverse_apply_columns(
            self.kron.inverse_apply_columns(self.conj.apply_columns(block))
        )


def perturbed(
    alpha: Sequence[RealTarget],
    v: TrigPolynomial | SmoothTruncation,
    n: int,
    sign: int = CALIBRATED_SHEAR_SIGN,
    h: SmoothTruncation | None = None,
) -> PerturbedPropagator:
    """Quantization of tau_alpha . Phi_V as a conjugate of the Kronecker propagator

    Pass a precomputed h to reuse it across a sweep.
    """
    kron = kronecker(alpha, n)
    if h is None:
        if as_polynomial(v).coeffs:
            check_diophantine(alpha[0])
            h = h_series(v, alpha[0])
        else:
            h = SmoothTruncation(TrigPolynomial.zero(), 0, 0.0)
    conj = shear(antiderivative(-h.poly), n, sign)
    return PerturbedPropagator(kron, conj, h)


def perturbed_eigenbasis(
    prop: PerturbedPropagator, basis: EigenBasis | None = None
) -> EigenBasis:
    """psi_j = U_h^-1 psi_j^tau for the Kronecker basis (or a supplied one)"""
    if basis is None:
        basis = eigenbasis_monomial(prop.kron.operator)
    if basis.dim != prop.dim:
        raise DimensionMismatchError(prop.dim, basis.dim)
    return basis.transported(prop.conj.inverse_apply_columns(basis.vectors))


def eigenbasis(prop: Propagator) -> EigenBasis:
    """Canonical eigenbasis: structured for monomials, transported for perturbed"""
    if isinstance(prop, PerturbedPropagator):
        return perturbed_eigenbasis(prop)
    if isinstance(prop, MonomialPropagator):
        return eigenbasis_monomial(prop.operator)
    raise TypeError(f"no canonical eigenbasis for {type(prop).__name__}")


# =============================================================================
# Egorov defects and sign calibration
# =============================================================================


@dataclass(frozen=True)
class DefectRecord:
    """Egorov defect of U against the classical composition fcirc

    Attributes:
        dim: N
        operator_norm: ||U^-1 Op_N(f) U - Op_N(fcirc)||, None above the dense guard
        matrix_element: max_j |<(U^-1 Op_N(f) U - Op_N(fcirc)) psi_j, psi_j>|
        tail_budget: truncation mass carried by f and fcirc
    """

    dim: int
    operator_norm: float | None
    matrix_element: float | None
    tail_budget: float


def egorov_defect(
    u: Propagator | MonomialOperator,
    f: TrigPolynomial | SmoothTruncation,
    fcirc: TrigPolynomial | SmoothTruncation,
    basis: EigenBasis | None = None,
    max_dense: int = MAX_DENSE_DIM,
) -> DefectRecord:
    if isinstance(u, MonomialOperator):
        u = MonomialPropagator(u)
    n = u.dim
    if basis is not None and basis.dim != n:
        raise DimensionMismatchError(n, basis.dim)
    op_f = quantize(f, n)
    op_fcirc = quantize(fcirc, n)

    def defect(block: np.ndarray) -> np.ndarray:
        conjugated = u.inverse_apply_columns(op_f.apply_columns(u.apply_columns(block)))
        return conjugated - op_fcirc.apply_columns(block)

    norm = None
    if n <= max_dense:
        dense = oracle.materialize(defect(np.eye(n, dtype=np.complex128)), max_dense)
        norm = oracle.operator_norm(dense)

    element = None
    if basis is not None:
        values = np.sum(defect(basis.vectors) * basis.vectors.conj(), axis=0) / n
        element = float(np.max(np.abs(values)))

    return DefectRecord(n, norm, element, tail_of(f) + tail_of(fcirc))


@dataclass(frozen=True)
class CalibrationResult:
    """Outcome of the shear sign calibration

    Attributes:
        sign: the convention whose defects decay
        slopes: fitted log-log slope per sign
        defects: matrix-element defects per sign, aligned with dims
        dims: the N values measured
        degenerate: True when V = 0 left nothing to measure
    """

    sign: int
    slopes: dict[int, float]
    defects: dict[int, tuple[float, ...]]
    dims: tuple[int, ...]
    degenerate: bool = False


def _loglog_slope(dims: Sequence[int], values: Sequence[float]) -> float:
    if max(values) <= EXACT_ZERO_CLAMP:
        return float("-inf")
    positive = [(n, v) for n, v in zip(dims, values, strict=True) if v > 0]
    xs = np.log([n for n, _ in positive])
    ys = np.log([v for _, v in positive])
    return float(np.polyfit(xs, ys, 1)[0])


def calibrate_sign(
    v: TrigPolynomial,
    dims: Sequence[int] = DEFAULT_CALIBRATION_N,
    monomial: tuple[int, int] = CALIBRATION_MONOMIAL,
) -> CalibrationResult:
    """Pick the shear sign for which U_W quantizes q -> q + V(p)

    Matrix elements are measured in the eigenbasis of T_N(-1, 1), where the
    first momentum harmonic of the test monomial is resonant.
    """
    if tuple(monomial) == (0, 0):
        raise ObservableError("calibration monomial must depend on q")
    dims = tuple(dims)
    if not v.coeffs:
        logger.warning("Calibration with V = 0 is degenerate; using sign +1")
        zeros = tuple(0.0 for _ in dims)
        flat = {1: float("-inf"), -1: float("-inf")}
        return CalibrationResult(
            1, flat, {1: zeros, -1: zeros}, dims, degenerate=True
        )

    f = TrigPolynomial.monomial(monomial)
    fcirc = compose_shear(f, v)
    w = antiderivative(v)
    defects: dict[int, tuple[float, ...]] = {}
    slopes: dict[int, float] = {}
    for sign in (1, -1):
        row = []
        for n in dims:
            basis = eigenbasis_monomial(weyl_operator((-1, 1), n))
            record = egorov_defect(shear(w, n, sign), f, fcirc, basis, max_dense=0)
            row.append(record.matrix_element)
        defects[sign] = tuple(row)
        slopes[sign] = _loglog_slope(dims, row)
        logger.debug(
            f"Calibration sign {sign:+d}: defects={row}, slope={slopes[sign]:.3f}"
        )

    passing = [s for s in (1, -1) if slopes[s] <= CALIBRATION_SLOPE]
    if len(passing) != 1:
        raise CalibrationError(
            f"expected exactly one shear sign with slope <= {CALIBRATION_SLOPE}, "
            f"got slopes {slopes}; check the Fourier and shear conventions"
        )
    logger.info(f"Calibrated shear sign {passing[0]:+d} (slopes {slopes})")
    return CalibrationResult(passing[0], slopes, defects, dims)


# =============================================================================
# Classical maps
# =============================================================================


def _as_floats(alpha: Sequence[RealTarget | float]) -> np.ndarray:
    values = [
        t.evaluate(MIN_WORKING_BITS) if isinstance(t, RealTarget) else t for t in alpha
    ]
    return np.array([float(x) for x in values])


def kronecker_map(
    points: np.ndarray, alpha: Sequence[RealTarget | float]
) -> np.ndarray:
    """tau_alpha on an array of (p, q) rows"""
    return np.mod(np.asarray(points, dtype=np.float64) + _as_floats(alpha), 1.0)


def shear_map(points: np.ndarray, v: TrigPolynomial) -> np.ndarray:
    """Phi_V(p, q) = (p, q + V(p))"""
    pts = np.array(points, dtype=np.float64)
    pts[..., 1] += np.real(v.evaluate(pts[..., 0]))
    return np.mod(pts, 1.0)


def perturbed_map(
    points: np.ndarray, alpha: Sequence[RealTarget | float], v: TrigPolynomial
) -> np.ndarray:
    """tau_alpha . Phi_V"""
    return kronecker_map(shear_map(points, v), alpha)


def torus_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    d = np.abs(np.mod(x - y + 0.5, 1.0) - 0.5)
    return np.max(d, axis=-1)


def conjugation_residual(
    alpha: Sequence[RealTarget],
    v: TrigPolynomial,
    h: SmoothTruncation | None = None,
    grid: int = CONJUGATION_GRID_SIZE,
) -> float:
    """max over a grid of dist(tau . Phi_V, Phi_h . tau . Phi_h^-1)"""
    if h is None:
        h = h_series(v, alpha[0])
    axis = np.arange(grid) / grid
    p, q = np.meshgrid(axis, axis, indexing="ij")
    points = np.stack([p.ravel(), q.ravel()], axis=1)
    left = perturbed_map(points, alpha, v)
    right = shear_map(kronecker_map(shear_map(points, -h.poly), alpha), h.poly)
    return float(np.max(torus_distance(left, right)))
