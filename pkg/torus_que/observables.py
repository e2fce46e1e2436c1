"""
Observables - Classical observables on the torus and their Weyl quantization

A classical observable is a finite Fourier series

    f(p, q) = sum_n f_hat(n) e(n1 p + n2 q),   e(x) = exp(2 pi i x),

and Op_N(f) = sum_n f_hat(n) T_N(n). The Poisson bracket is the standard one,
{f, g} = f_p g_q - f_q g_p, which on exponentials gives
{e_m, e_n} = -4 pi^2 omega(m, n) e_{m+n}. Mind the -4 pi^2: it comes from
two factors of 2 pi i and a sign slip here goes unnoticed by most checks.
"""

import json
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import mpmath
import numpy as np

from torus_que.constants import (
    COEFFICIENT_DROP_TOL,
    DEFAULT_FAMILY_RADIUS,
    MAX_FREQUENCY,
    SHEAR_SAMPLING_MARGIN,
)
from torus_que.errors import DimensionMismatchError, ObservableError
from torus_que.hilbert import StateVector
from torus_que.logger import get_logger
from torus_que.weyl import ExactPhase, MonomialOperator, WeylIndex, omega, weyl_operator

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """Finite Fourier series n -> f_hat(n); zero coefficients are not stored"""

    coeffs: Mapping[WeylIndex, complex]

    def __post_init__(self) -> None:
        cleaned: dict[WeylIndex, complex] = {}
        for n, c in self.coeffs.items():
            value = complex(c)
            if value != 0:
                cleaned[WeylIndex(int(n[0]), int(n[1]))] = value
        object.__setattr__(self, "coeffs", dict(sorted(cleaned.items())))

    # ----- constructors -------------------------------------------------

    @classmethod
    def zero(cls) -> "TrigPolynomial":
        return cls({})

    @classmethod
    def constant(cls, c: complex) -> "TrigPolynomial":
        return cls({WeylIndex(0, 0): c})

    @classmethod
    def monomial(cls, n: tuple[int, int], c: complex = 1.0) -> "TrigPolynomial":
        return cls({WeylIndex(*n): c})

    @classmethod
    def from_terms(
        cls, terms: Iterable[tuple[tuple[int, int], complex]]
    ) -> "TrigPolynomial":
        acc: dict[WeylIndex, complex] = defaultdict(complex)
        for n, c in terms:
            acc[WeylIndex(*n)] += c
        return cls(acc)

    # ----- algebra ------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrigPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n: tuple[int, int]) -> complex:
        return self.coeffs.get(WeylIndex(*n), 0j)

    def items(self) -> Iterable[tuple[WeylIndex, complex]]:
        return self.coeffs.items()

    def __add__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        return TrigPolynomial.from_terms([*self.items(), *other.items()])

    def __neg__(self) -> "TrigPolynomial":
        return self.scaled(-1.0)

    def __sub__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        return self + (-other)

    def scaled(self, c: complex) -> "TrigPolynomial":
        return TrigPolynomial({n: c * v for n, v in self.items()})

    def __mul__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        return TrigPolynomial.from_terms(
            ((m.n1 + n.n1, m.n2 + n.n2), a * b)
            for m, a in self.items()
            for n, b in other.items()
        )

    def conj(self) -> "TrigPolynomial":
        """Coefficients of the complex conjugate function"""
        return TrigPolynomial({n.negated(): v.conjugate() for n, v in self.items()})

    def is_real(self, tol: float = 0.0) -> bool:
        return all(
            abs(self[n.negated()] - v.conjugate()) <= tol for n, v in self.items()
        )

    def mean(self) -> complex:
        return self[(0, 0)]

    def support_radius(self) -> int:
        return max((n.sup_norm() for n in self.coeffs), default=0)

    def depends_on_q(self) -> bool:
        return any(n.n2 != 0 for n in self.coeffs)

    def l1_norm(self) -> float:
        return float(sum(abs(v) for v in self.coeffs.values()))

    def drop_small(
        self, tol: float = COEFFICIENT_DROP_TOL
    ) -> tuple["TrigPolynomial", float]:
        """Remove coefficients below tol; also return the dropped mass"""
        kept = {n: v for n, v in self.items() if abs(v) >= tol}
        dropped = float(sum(abs(v) for n, v in self.items() if n not in kept))
        return TrigPolynomial(kept), dropped

    def check_support(self, max_frequency: int | None = MAX_FREQUENCY) -> None:
        if max_frequency is not None and self.support_radius() > max_frequency:
            raise ObservableError(
                f"frequency support {self.support_radius()} exceeds {max_frequency}; "
                "pass a larger max_frequency to opt in"
            )

    # ----- evaluation ---------------------------------------------------

    def evaluate(
        self, p: np.ndarray | float, q: np.ndarray | float = 0.0
    ) -> np.ndarray:
        p_arr = np.asarray(p, dtype=np.float64)
        q_arr = np.asarray(q, dtype=np.float64)
        total = np.zeros(np.broadcast(p_arr, q_arr).shape, dtype=np.complex128)
        for n, c in self.items():
            total = total + c * np.exp(2j * np.pi * (n.n1 * p_arr + n.n2 * q_arr))
        return total

    def derivative_p(self) -> "TrigPolynomial":
        return TrigPolynomial({n: 2j * np.pi * n.n1 * v for n, v in self.items()})

    def antiderivative_p(self) -> "TrigPolynomial":
        """Mean-zero antiderivative in p of a p-only series with zero mean"""
        if self.depends_on_q():
            raise ObservableError("antiderivative_p needs a p-only series")
        if self.mean() != 0:
            raise ObservableError("antiderivative_p needs a mean-zero series")
        return TrigPolynomial({n: v / (2j * np.pi * n.n1) for n, v in self.items()})

    # ----- serialization ------------------------------------------------

    def to_json_object(self) -> dict[str, list[float]]:
        return {f"{n.n1},{n.n2}": [v.real, v.imag] for n, v in self.items()}

    @classmethod
    def from_json_object(cls, data: Mapping[str, list[float]]) -> "TrigPolynomial":
        terms = {}
        for key, value in data.items():
            n1, n2 = (int(part) for part in str(key).split(","))
            re, im = (float(x) for x in value)
            terms[WeylIndex(n1, n2)] = complex(re, im)
        return cls(terms)

    def dumps(self) -> str:
        return json.dumps(self.to_json_object(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "TrigPolynomial":
        return cls.from_json_object(json.loads(text))


@dataclass(frozen=True)
class SmoothTruncation:
    """A truncated series with a certified bound on the dropped l1 mass

    Attributes:
        poly: Retained terms
        radius: Truncation cutoff R
        tail_bound: Upper bound for sum_{||n|| > R} |f_hat(n)|
    """

    poly: TrigPolynomial
    radius: int
    tail_bound: float


def as_polynomial(f: TrigPolynomial | SmoothTruncation) -> TrigPolynomial:
    return f.poly if isinstance(f, SmoothTruncation) else f


def tail_of(f: TrigPolynomial | SmoothTruncation) -> float:
    return f.tail_bound if isinstance(f, SmoothTruncation) else 0.0


class QuantizedObservable:
    """Op_N(f) = sum f_hat(n) T_N(n) kept as (coefficient, monomial) pairs

    Terms sharing n1 share a permutation, so application is done per shift
    class: diag(w_{n1}) followed by the shift Q -> Q + n1.
    """

    def __init__(self, f: TrigPolynomial, dim: int) -> None:
        self.f = f
        self.dim = dim
        self.terms: list[tuple[complex, MonomialOperator]] = [
            (c, weyl_operator(n, dim)) for n, c in f.items()
        ]
        self._groups: dict[int, np.ndarray] | None = None

    @property
    def mean(self) -> complex:
        return self.f.mean()

    def shift_groups(self) -> dict[int, np.ndarray]:
        if self._groups is None:
            groups: dict[int, np.ndarray] = {}
            for c, op in self.terms:
                shift = int(op.target[0])
                if shift not in groups:
                    groups[shift] = np.zeros(self.dim, dtype=np.complex128)
                groups[shift] += c * op.phase_values()
            self._groups = groups
        return self._groups

    def apply_columns(self, block: np.ndarray) -> np.ndarray:
        if block.shape[0] != self.dim:
            raise DimensionMismatchError(self.dim, block.shape[0])
        out = np.zeros(block.shape, dtype=np.complex128)
        for shift, weights in self.shift_groups().items():
            out += weights[:, None] * np.roll(block, -shift, axis=0)
        return out

    def apply(self, psi: StateVector) -> StateVector:
        if psi.dim != self.dim:
            raise DimensionMismatchError(self.dim, psi.dim)
        return StateVector(self.apply_columns(psi.entries[:, None])[:, 0])

    def diagonal_elements(self, block: np.ndarray) -> np.ndarray:
        """<Op v_j, v_j> for every column v_j of block"""
        return np.sum(self.apply_columns(block) * block.conj(), axis=0) / self.dim

    def to_matrix(self) -> np.ndarray:
        matrix = np.zeros((self.dim, self.dim), dtype=np.complex128)
        rows = np.arange(self.dim)
        for shift, weights in self.shift_groups().items():
            matrix[rows, (rows + shift) % self.dim] += weights
        return matrix


def quantize(
    f: TrigPolynomial | SmoothTruncation,
    dim: int,
    max_frequency: int | None = None,
) -> QuantizedObservable:
    """Op_N(f); max_frequency enforces the support guard when given"""
    poly = as_polynomial(f)
    poly.check_support(max_frequency)
    return QuantizedObservable(poly, dim)


def _is_rational(x: object) -> bool:
    return isinstance(x, Rational)


def translation_factor(n: WeylIndex, shift: tuple) -> complex:
    """e(n . shift), exact for rational shifts"""
    if all(_is_rational(s) for s in shift):
        x = Fraction(n.n1) * Fraction(shift[0]) + Fraction(n.n2) * Fraction(shift[1])
        return ExactPhase.from_fraction(2 * x).to_complex()
    with mpmath.workdps(40):
        x = n.n1 * mpmath.mpf(shift[0]) + n.n2 * mpmath.mpf(shift[1])
        x -= mpmath.floor(x)
        return complex(mpmath.expjpi(2 * x))


def compose_translation(f: TrigPolynomial, shift: tuple) -> TrigPolynomial:
    """Coefficients of f . tau_shift, i.e. f(x + shift)"""
    return TrigPolynomial({n: c * translation_factor(n, shift) for n, c in f.items()})


def default_sampling_size(f: TrigPolynomial, h: TrigPolynomial) -> int:
    """Power of two large enough to resolve e(n1 p + n2 h(p)) for f's terms"""
    if not h.coeffs or not f.depends_on_q():
        bandwidth = f.support_radius()
    else:
        deviation = 2 * math.pi * max(abs(n.n2) for n in f.coeffs) * h.l1_norm()
        harmonics = deviation + 12 * deviation ** (1 / 3) + SHEAR_SAMPLING_MARGIN
        spread = h.support_radius() * math.ceil(harmonics)
        bandwidth = max(abs(n.n1) for n in f.coeffs) + spread
    bandwidth = max(bandwidth, h.support_radius())
    size = 64
    while size < 4 * max(bandwidth, 1):
        size *= 2
    return size


def compose_shear(
    f: TrigPolynomial, h: TrigPolynomial, sampling: int | None = None
) -> SmoothTruncation:
    """Fourier re-expansion of f(p, q + h(p)) on a sampling-point grid

    The tail bound is the l1 mass of coefficients dropped below the
    coefficient threshold.
    """
    if h.depends_on_q():
        raise ObservableError("shear profile must depend on p only")
    if not h.coeffs:
        return SmoothTruncation(f, f.support_radius(), 0.0)
    if sampling is None:
        sampling = default_sampling_size(f, h)
    max_freq = max(f.support_radius(), h.support_radius())
    if sampling & (sampling - 1) or sampling < 4 * max(max_freq, 1):
        raise ObservableError(
            f"sampling size {sampling} must be a power of two >= 4 * {max_freq}"
        )

    grid = np.arange(sampling) / sampling
    h_values = h.evaluate(grid)
    freqs = np.fft.fftfreq(sampling, d=1.0 / sampling).astype(np.int64)
    by_n2: dict[int, list[tuple[int, complex]]] = defaultdict(list)
    for n, c in f.items():
        by_n2[n.n2].append((n.n1, c))

    terms: dict[WeylIndex, complex] = defaultdict(complex)
    for n2, row in by_n2.items():
        if n2 == 0:
            for n1, c in row:
                terms[WeylIndex(n1, 0)] += c
            continue
        spectrum = np.fft.fft(np.exp(2j * np.pi * n2 * h_values)) / sampling
        n1s = np.array([n1 for n1, _ in row], dtype=np.int64)
        cs = np.array([c for _, c in row], dtype=np.complex128)
        lowest = int(n1s.min() + freqs.min())
        acc = np.zeros(int(n1s.max() - n1s.min()) + sampling, dtype=np.complex128)
        index = n1s[:, None] + freqs[None, :] - lowest
        np.add.at(acc, index.ravel(), (cs[:, None] * spectrum[None, :]).ravel())
        for offset in np.flatnonzero(acc):
            terms[WeylIndex(lowest + int(offset), n2)] += acc[offset]

    poly, dropped = TrigPolynomial(terms).drop_small()
    logger.debug(
        f"compose_shear: {len(f)} -> {len(poly)} terms, "
        f"K={sampling}, tail={dropped:.3e}"
    )
    return SmoothTruncation(poly, poly.support_radius(), dropped)


def time_average(
    f: TrigPolynomial, shift: tuple[int, int], dim: int, steps: int
) -> TrigPolynomial:
    """f^T = (1/T) sum_{t<T} f . tau_{a/N}^t

    Each coefficient picks up (1/T) sum_t e_N(t n.a); the factor is exactly 1
    for n.a = 0 mod N and exactly 0 when T is a multiple of the period.
    """
    if steps < 1:
        raise ValueError("T must be positive")
    terms = {}
    for n, c in f.items():
        r = (n.n1 * shift[0] + n.n2 * shift[1]) % dim
        if r == 0:
            terms[n] = c
            continue
        period = dim // math.gcd(r, dim)
        if steps % period == 0:
            continue
        t = np.arange(steps)
        terms[n] = c * complex(np.mean(np.exp(2j * np.pi * t * r / dim)))
    return TrigPolynomial(terms)


def poisson_bracket(f: TrigPolynomial, g: TrigPolynomial) -> TrigPolynomial:
    """{f, g} = f_p g_q - f_q g_p"""
    factor = -4 * np.pi**2
    return TrigPolynomial.from_terms(
        ((m.n1 + n.n1, m.n2 + n.n2), factor * omega(m, n) * a * b)
        for m, a in f.items()
        for n, b in g.items()
        if omega(m, n) != 0
    )


def gaussian_family(
    n0: tuple[int, int], decay: float, radius: int = DEFAULT_FAMILY_RADIUS
) -> SmoothTruncation:
    """f_hat(k n0) = e^{-decay (k - 1)} for k = 1..R along the ray through n0"""
    if decay <= 0:
        raise ValueError("decay must be positive")
    if tuple(n0) == (0, 0):
        raise ObservableError("ray direction must be nonzero")
    terms = {
        WeylIndex(k * n0[0], k * n0[1]): math.exp(-decay * (k - 1))
        for k in range(1, radius + 1)
    }
    x = math.exp(-decay)
    tail = x**radius / (1 - x)
    return SmoothTruncation(TrigPolynomial(terms), radius, tail)


def exponential_family(
    decay: float, radius: int = DEFAULT_FAMILY_RADIUS
) -> SmoothTruncation:
    """Real mean-zero f with f_hat(n) = e^{-decay ||n||_inf} for 0 < ||n||_inf <= R

    There are 8k frequencies on the sup-norm sphere of radius k, so the tail is
    8 sum_{k>R} k x^k = 8 x^{R+1} ((R+1) - R x) / (1-x)^2 with x = e^{-decay}.
    """
    if decay <= 0:
        raise ValueError("decay must be positive")
    terms = {
        WeylIndex(n1, n2): math.exp(-decay * max(abs(n1), abs(n2)))
        for n1 in range(-radius, radius + 1)
        for n2 in range(-radius, radius + 1)
        if (n1, n2) != (0, 0)
    }
    x = math.exp(-decay)
    tail = 8 * x ** (radius + 1) * ((radius + 1) - radius * x) / (1 - x) ** 2
    return SmoothTruncation(TrigPolynomial(terms), radius, tail)


def slow_convergence_observable(denominators: Iterable[int]) -> TrigPolynomial:
    """f(p, q) = sum_n e^{-d_n} e(d_n q); terms that underflow are skipped"""
    terms = {}
    for d in denominators:
        weight = math.exp(-d) if d < 800 else 0.0
        if weight > 0:
            terms[WeylIndex(0, int(d))] = weight
    return TrigPolynomial(terms)


def random_trig_polynomial(
    rng: np.random.Generator, terms: int, radius: int, real: bool = False
) -> TrigPolynomial:
    """Random complex coefficients on random frequencies with ||n||_inf <= radius"""
    freqs = rng.integers(-radius, radius + 1, size=(terms, 2))
    values = rng.standard_normal(terms) + 1j * rng.standard_normal(terms)
    f = TrigPolynomial.from_terms(
        ((int(a), int(b)), complex(v)) for (a, b), v in zip(freqs, values, strict=True)
    )
    if real:
        return (f + f.conj()).scaled(0.5)
    return f
