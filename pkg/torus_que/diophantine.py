"""
Diophantine - Continued fractions, rational approximation and the
construction of slowly approximable numbers

Targets are exact objects: rationals, quadratic irrationals (p + q sqrt(d))/r
and continued fractions given by a finite prefix plus an optional periodic
tail. Quadratic irrationals are expanded with the integer surd recurrence,
so convergents never depend on floating point. A continued fraction marked
``truncated`` is the known prefix of an infinite expansion (the numbers built
by construct_beta); asking it for more quotients than it knows raises
PrecisionExhaustedError.
"""

import ast
import itertools
import json
import math
import operator
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from torus_que.constants import (
    MAX_CONSTRUCTION_BITS,
    MAX_PRECISION_DOUBLINGS,
    MIN_WORKING_BITS,
    WORKING_BITS_FACTOR,
)
from torus_que.errors import (
    ConfigError,
    ConstructionOverflowError,
    PrecisionExhaustedError,
)
from torus_que.logger import get_logger

logger = get_logger(__name__)

QUADRATIC = "quadratic"
CONTINUED_FRACTION = "continued-fraction"
RATIONAL = "rational"

# Candidates re-checked in high precision after the float64 scan
SCAN_REFINE_COUNT = 32


@dataclass(frozen=True)
class RealTarget:
    """A real number known exactly enough to expand and evaluate

    Attributes:
        kind: quadratic, continued-fraction or rational
        quadratic: (p, q, d, r) for (p + q sqrt(d)) / r
        quotients: leading partial quotients a0; a1, a2, ...
        period: repeating tail of partial quotients
        truncated: quotients are a prefix of an infinite expansion
        rational: exact value for rational targets
    """

    kind: str
    quadratic: tuple[int, int, int, int] | None = None
    quotients: tuple[int, ...] = ()
    period: tuple[int, ...] = ()
    truncated: bool = False
    rational: Fraction | None = None

    # ----- constructors -------------------------------------------------

    @classmethod
    def from_fraction(cls, value: Fraction | int) -> "RealTarget":
        return cls(RATIONAL, rational=Fraction(value))

    @classmethod
    def quadratic_surd(cls, p: int, q: int, d: int, r: int = 1) -> "RealTarget":
        if r == 0 or d < 0:
            raise ValueError("need r != 0 and d >= 0")
        root = math.isqrt(d)
        if q == 0 or root * root == d:
            return cls.from_fraction(Fraction(p + q * root, r))
        return cls(QUADRATIC, quadratic=(p, q, d, r))

    @classmethod
    def sqrt(cls, d: int) -> "RealTarget":
        return cls.quadratic_surd(0, 1, d, 1)

    @classmethod
    def from_quotients(
        cls,
        quotients: Sequence[int],
        period: Sequence[int] = (),
        truncated: bool = False,
    ) -> "RealTarget":
        if not quotients and not period:
            raise ValueError("a continued fraction needs at least one quotient")
        if any(a <= 0 for a in list(quotients)[1:]) or any(a <= 0 for a in period):
            raise ValueError("partial quotients after a0 must be positive")
        return cls(
            CONTINUED_FRACTION,
            quotients=tuple(int(a) for a in quotients),
            period=tuple(int(a) for a in period),
            truncated=truncated and not period,
        )

    @classmethod
    def parse(cls, spec: str | int) -> "RealTarget":
        """Parse 'sqrt(d)', 'p/q', an integer, 'quad:p,q,d,r' or 'cf:a0;a1,(p1,p2)'"""
        text = str(spec).strip().replace(" ", "")
        try:
            if text.startswith("sqrt(") and text.endswith(")"):
                return cls.sqrt(int(text[5:-1]))
            if text.startswith("quad:"):
                p, q, d, r = (int(x) for x in text[5:].split(","))
                return cls.quadratic_surd(p, q, d, r)
            if text.startswith("cf:"):
                return cls._parse_cf(text[3:])
            return cls.from_fraction(Fraction(text))
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"cannot parse real target {spec!r}: {e}") from e

    @classmethod
    def _parse_cf(cls, body: str) -> "RealTarget":
        head, _, rest = body.partition(";")
        truncated = rest.endswith("...")
        rest = rest.removesuffix("...")
        period: list[int] = []
        if "(" in rest:
            rest, _, tail = rest.partition("(")
            period = [int(x) for x in tail.rstrip(")").split(",") if x]
        quotients = [int(head)] + [int(x) for x in rest.split(",") if x]
        return cls.from_quotients(quotients, period, truncated)

    def to_spec(self) -> str:
        if self.kind == RATIONAL:
            return str(self.rational)
        if self.kind == QUADRATIC:
            p, q, d, r = self.quadratic
            if (p, q, r) == (0, 1, 1):
                return f"sqrt({d})"
            return f"quad:{p},{q},{d},{r}"
        head, *rest = self.quotients or (0,)
        body = f"cf:{head};" + ",".join(str(a) for a in rest)
        if self.period:
            period = ",".join(str(a) for a in self.period)
            body += ("," if rest else "") + f"({period})"
        if self.truncated:
            body += "..."
        return body

    # ----- properties ---------------------------------------------------

    @property
    def is_rational(self) -> bool:
        if self.kind == RATIONAL:
            return True
        finite = not self.period and not self.truncated
        return self.kind == CONTINUED_FRACTION and finite

    def exact_value(self) -> Fraction | None:
        if self.kind == RATIONAL:
            return self.rational
        if self.is_rational:
            conv = convergents(self, len(self.quotients))
            return Fraction(conv[-1].c, conv[-1].d)
        return None

    def partial_quotients(self) -> Iterator[int]:
        """Partial quotients a0, a1, ...; finite for rationals"""
        if self.kind == RATIONAL:
            yield from _euclid_quotients(self.rational)
        elif self.kind == QUADRATIC:
            yield from _surd_quotients(*self.quadratic)
        else:
            yield from self.quotients
            if self.truncated:
                raise PrecisionExhaustedError(
                    f"only {len(self.quotients)} partial quotients are known; "
                    "construct more levels to go further"
                )
            while self.period:
                yield from self.period

    def evaluate(self, bits: int) -> mpmath.mpf:
        """Value at the requested binary precision"""
        with mpmath.workprec(bits + 16):
            if self.kind == RATIONAL:
                value = mpmath.mpf(self.rational.numerator) / self.rational.denominator
            elif self.kind == QUADRATIC:
                p, q, d, r = self.quadratic
                value = (p + q * mpmath.sqrt(d)) / r
            else:
                value = self._evaluate_cf(bits)
        with mpmath.workprec(bits):
            return +value

    def _evaluate_cf(self, bits: int) -> mpmath.mpf:
        h_prev, h = 1, 0
        k_prev, k = 0, 1
        first = True
        quotients = self.partial_quotients()
        while True:
            try:
                a = next(quotients)
            except (StopIteration, PrecisionExhaustedError):
                break
            if first:
                h_prev, h, k_prev, k = 1, a, 0, 1
                first = False
            else:
                h_prev, h = h, a * h + h_prev
                k_prev, k = k, a * k + k_prev
            if k.bit_length() * 2 > bits + 8:
                break
        return mpmath.mpf(h) / k


def _euclid_quotients(value: Fraction) -> Iterator[int]:
    num, den = value.numerator, value.denominator
    while den:
        a = num // den
        yield a
        num, den = den, num - a * den


def _surd_quotients(p: int, q: int, d: int, r: int) -> Iterator[int]:
    """Exact expansion of (p + q sqrt(d)) / r via (P + sqrt(D)) / Q recurrences"""
    sign = 1 if q > 0 else -1
    big_p, big_q, big_d = p * sign, r * sign, q * q * d
    if (big_d - big_p * big_p) % big_q:
        scale = abs(big_q)
        big_p *= scale
        big_d *= scale * scale
        big_q *= scale
    root = math.isqrt(big_d)
    while True:
        if big_q > 0:
            a = (big_p + root) // big_q
        else:
            a = (big_p + root + 1) // big_q
        yield a
        big_p = a * big_q - big_p
        big_q = (big_d - big_p * big_p) // big_q


@dataclass(frozen=True)
class Convergent:
    """c/d = [a0; a1, ..., a_index]"""

    c: int
    d: int
    index: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.c, self.d)


def convergents(target: RealTarget, count: int) -> list[Convergent]:
    """First count convergents (fewer when a rational expansion terminates)"""
    result: list[Convergent] = []
    h_prev, h = 1, 0
    k_prev, k = 0, 1
    for index, a in enumerate(itertools.islice(target.partial_quotients(), count)):
        if index == 0:
            h_prev, h, k_prev, k = 1, a, 0, 1
        else:
            h_prev, h = h, a * h + h_prev
            k_prev, k = k, a * k + k_prev
        result.append(Convergent(h, k, index))
    return result


_minimum_bits = MIN_WORKING_BITS


def set_minimum_working_bits(bits: int | None) -> None:
    """Raise the precision floor of every mpmath evaluation (None resets it)"""
    global _minimum_bits
    if bits is not None and bits < MIN_WORKING_BITS:
        raise ValueError(f"working precision must be at least {MIN_WORKING_BITS} bits")
    _minimum_bits = MIN_WORKING_BITS if bits is None else bits


def working_bits(*integers: int) -> int:
    largest = max((abs(x).bit_length() for x in integers), default=1)
    return max(_minimum_bits, WORKING_BITS_FACTOR * largest)


def nearest_integer(target: RealTarget, multiplier: int) -> int:
    """round(multiplier * target), ties toward even"""
    exact = target.exact_value()
    if exact is not None:
        return round(multiplier * exact)
    bits = working_bits(multiplier)
    for _ in range(MAX_PRECISION_DOUBLINGS):
        with mpmath.workprec(bits):
            x = multiplier * target.evaluate(bits)
            floor = int(mpmath.floor(x))
            frac = x - floor
            margin = mpmath.ldexp(1, -(bits // 2))
            if abs(frac - mpmath.mpf(0.5)) > margin:
                return floor + 1 if frac > 0.5 else floor
        logger.debug(f"Rounding too close to call at {bits} bits, doubling")
        bits *= 2
    raise PrecisionExhaustedError(
        f"cannot round {multiplier} * {target.to_spec()} at {bits} bits; "
        "raise the working precision"
    )


def best_approx(alpha: Sequence[RealTarget], n: int) -> tuple[int, ...]:
    """a_i = nearest integer to N alpha_i, so |alpha_i - a_i/N| <= 1/(2N)"""
    if n < 1:
        raise ValueError(f"N must be positive, got {n}")
    return tuple(nearest_integer(t, n) for t in alpha)


@dataclass(frozen=True)
class DiophantineReport:
    """Minimum of |n . alpha + k| * ||n||^gamma over 0 < ||n||_inf <= n_max"""

    gamma: float
    n_max: int
    c_estimate: float
    worst_witness: tuple[int, ...]
    alpha: tuple[str, ...] = ()

    def to_json(self) -> str:
        return json.dumps(
            {
                "alpha": list(self.alpha),
                "gamma": self.gamma,
                "n_max": self.n_max,
                "c_estimate": self.c_estimate,
                "worst_witness": list(self.worst_witness),
            },
            sort_keys=True,
            indent=2,
        )


def _frequency_grid(dimension: int, n_max: int) -> np.ndarray:
    """Half of the box 0 < ||n||_inf <= n_max (n and -n give equal gaps)"""
    if dimension == 1:
        return np.arange(1, n_max + 1, dtype=np.int64)[:, None]
    axis = np.arange(-n_max, n_max + 1, dtype=np.int64)
    n1, n2 = np.meshgrid(axis, axis, indexing="ij")
    grid = np.stack([n1.ravel(), n2.ravel()], axis=1)
    keep = (grid[:, 0] > 0) | ((grid[:, 0] == 0) & (grid[:, 1] > 0))
    return grid[keep]


def diophantine_scan(
    alpha: Sequence[RealTarget], gamma: float, n_max: int
) -> DiophantineReport:
    """Finite-range estimate of the diophantine constant for exponent gamma"""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if not 1 <= len(alpha) <= 2:
        raise ValueError("scan supports one or two targets")
    grid = _frequency_grid(len(alpha), n_max)
    norms = np.sqrt(np.sum(grid.astype(np.float64) ** 2, axis=1))
    labels = tuple(t.to_spec() for t in alpha)

    exact = [t.exact_value() for t in alpha]
    if all(v is not None for v in exact):
        common = math.lcm(*(v.denominator for v in exact))
        nums = np.array([v.numerator * (common // v.denominator) for v in exact])
        residues = np.mod(grid @ nums, common)
        gaps = np.minimum(residues, common - residues) / common
        scores = gaps * norms**gamma
        best = int(np.argmin(scores))
        k = -int(round(Fraction(int(grid[best] @ nums), common)))
        return DiophantineReport(
            gamma, n_max, float(scores[best]), (*map(int, grid[best]), k), labels
        )

    bits = working_bits(n_max) + 64
    values = np.array([float(t.evaluate(bits)) for t in alpha])
    x = grid @ values
    gaps = np.abs(x - np.round(x))
    scores = gaps * norms**gamma
    candidates = np.argsort(scores, kind="stable")[:SCAN_REFINE_COUNT]

    refined_best: tuple[mpmath.mpf, int, int] | None = None
    with mpmath.workprec(bits):
        precise = [t.evaluate(bits) for t in alpha]
        for idx in sorted(int(i) for i in candidates):
            total = sum(int(n) * v for n, v in zip(grid[idx], precise, strict=True))
            k = -int(mpmath.nint(total))
            score = abs(total + k) * mpmath.mpf(norms[idx]) ** gamma
            if refined_best is None or score < refined_best[0]:
                refined_best = (score, idx, k)
    score, idx, k = refined_best
    witness = (*map(int, grid[idx]), k)
    report = DiophantineReport(gamma, n_max, float(score), witness, labels)
    logger.debug(
        f"Diophantine scan {labels} gamma={gamma} n_max={n_max}: "
        f"{report.c_estimate:.3e}"
    )
    return report


# =============================================================================
# Construction of slowly approximable beta
# =============================================================================

_ALLOWED_BINOPS: dict[type, Callable] = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_ALLOWED_FUNCS: dict[str, Callable] = {
    "exp": mpmath.exp,
    "log": mpmath.log,
    "sqrt": mpmath.sqrt,
}
_ALLOWED_NAMES: dict[str, Callable[[], mpmath.mpf]] = {
    "e": lambda: mpmath.e,
    "pi": lambda: mpmath.pi,
}


def _eval_node(node: ast.AST, x: mpmath.mpf) -> mpmath.mpf:
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, x)
    if isinstance(node, ast.Constant) and isinstance(node.value, int | float):
        return mpmath.mpf(node.value)
    if isinstance(node, ast.Name):
        if node.id == "x":
            return x
        if node.id in _ALLOWED_NAMES:
            return _ALLOWED_NAMES[node.id]()
    if isinstance(node, ast.BinOp) and type(node.op) in _ALLOWED_BINOPS:
        left, right = _eval_node(node.left, x), _eval_node(node.right, x)
        return _ALLOWED_BINOPS[type(node.op)](left, right)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub | ast.UAdd):
        value = _eval_node(node.operand, x)
        return -value if isinstance(node.op, ast.USub) else value
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _ALLOWED_FUNCS
        and len(node.args) == 1
    ):
        return _ALLOWED_FUNCS[node.func.id](_eval_node(node.args[0], x))
    raise ConfigError(
        f"unsupported syntax in growth expression: {ast.dump(node)}", "growth"
    )


@dataclass(frozen=True)
class GrowthFunction:
    """Positive increasing g given as an expression in x; G = log g"""

    expression: str
    tree: ast.Expression = field(repr=False, compare=False)

    def g(self, x: int | mpmath.mpf) -> mpmath.mpf:
        return _eval_node(self.tree, mpmath.mpf(x))

    def log_g(self, x: int | mpmath.mpf) -> mpmath.mpf:
        return mpmath.log(self.g(x))


def parse_growth(expression: str) -> GrowthFunction:
    try:
        tree = ast.parse(expression, mode="eval")
    except SyntaxError as e:
        message = f"cannot parse growth expression {expression!r}"
        raise ConfigError(message, "growth") from e
    growth = GrowthFunction(expression, tree)
    with mpmath.workprec(MIN_WORKING_BITS):
        growth.g(2)  # surfaces unsupported syntax early
    return growth


def generalized_inverse(
    big_g: Callable[[int], mpmath.mpf], max_bits: int = MAX_CONSTRUCTION_BITS
) -> Callable[[int | mpmath.mpf], int]:
    """F(y) = min{x >= 1 integer : G(x) >= y} by doubling then bisection"""

    def at_least(x: int, y: int | mpmath.mpf) -> bool:
        with mpmath.workprec(working_bits(x) + 32):
            return bool(big_g(x) >= y)

    def inverse(y: int | mpmath.mpf) -> int:
        hi = 1
        while not at_least(hi, y):
            hi *= 2
            if hi.bit_length() > max_bits:
                raise ConstructionOverflowError(
                    f"generalized inverse at {y} exceeds {max_bits} bits; "
                    "raise max_bits to continue in big-integer mode"
                )
        lo = hi // 2
        if hi == 1:
            return 1
        # invariant: G(lo) < y <= G(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if at_least(mid, y):
                hi = mid
            else:
                lo = mid
        return hi

    return inverse


@dataclass(frozen=True)
class LevelCertificate:
    """Checks for one constructed level n"""

    level: int
    f_value: str
    quotient_bound: bool  # F(d_n) <= b_{n+1} d_n^2
    approximation_bound: bool  # F(d_n) < d_n d_{n+1}, hence |beta - c_n/d_n| < 1/F(d_n)
    recurrence: bool  # d_{n+1} = b_{n+1} d_n + d_{n-1}
    coprime: bool


@dataclass(frozen=True)
class ConstructionTranscript:
    """beta = [0; b_1, b_2, ...] with its certified convergents c_n/d_n

    quotients holds b_1..b_{k+1}; convergents holds levels 1..k+1 so that
    every level n <= k has its successor denominator d_{n+1} available.
    """

    target: RealTarget
    quotients: tuple[int, ...]
    convergents: tuple[Convergent, ...]
    certificates: tuple[LevelCertificate, ...]

    @property
    def levels(self) -> int:
        return len(self.certificates)

    def level(self, n: int) -> Convergent:
        return self.convergents[n - 1]

    def next_quotient(self, n: int) -> int:
        """b_{n+1}"""
        return self.quotients[n]

    def to_json(self) -> str:
        return json.dumps(
            {
                "beta": self.target.to_spec(),
                "quotients": list(self.quotients),
                "convergents": [[c.index, c.c, c.d] for c in self.convergents],
                "certificates": [vars(cert) for cert in self.certificates],
            },
            sort_keys=True,
            indent=2,
        )


def _ceil_ratio(value: int | float | mpmath.mpf, denominator: int) -> int:
    if isinstance(value, int):
        return -(-value // denominator)
    with mpmath.workprec(working_bits(denominator) + 64):
        return int(mpmath.ceil(mpmath.mpf(value) / denominator))


def _at_most(value: int | float | mpmath.mpf, bound: int, strict: bool = False) -> bool:
    if isinstance(value, int):
        return value < bound if strict else value <= bound
    with mpmath.workprec(working_bits(bound) + 64):
        v = mpmath.mpf(value)
        return bool(v < bound) if strict else bool(v <= bound)


def construct_beta(
    big_f: Callable[[int], int | float | mpmath.mpf],
    levels: int,
    max_bits: int = MAX_CONSTRUCTION_BITS,
) -> ConstructionTranscript:
    """Build beta with F(d_n) <= b_{n+1} d_n^2 and |beta - c_n/d_n| < 1/F(d_n)"""
    if levels < 1:
        raise ValueError("need at least one level")
    # b_1 = 1 gives c_1/d_1 = 1/1 from c_0/d_0 = 0/1 and c_-1/d_-1 = 1/0
    quotients = [1]
    c_prev, c = 0, 1
    d_prev, d = 1, 1
    cs: list[int] = [c]
    ds: list[int] = [d]

    f_values = []
    for n in range(1, levels + 1):
        dn = ds[n - 1]
        with mpmath.workprec(working_bits(dn) + 64):
            f_value = big_f(dn)
        b_next = max(1, _ceil_ratio(f_value, dn * dn))
        if (b_next * dn).bit_length() > max_bits:
            raise ConstructionOverflowError(
                f"level {n + 1} denominator exceeds {max_bits} bits; "
                "raise max_bits to continue in big-integer mode"
            )
        quotients.append(b_next)
        c_prev, c = c, b_next * c + c_prev
        d_prev, d = d, b_next * d + d_prev
        cs.append(c)
        ds.append(d)
        f_values.append(f_value)

    conv = tuple(Convergent(cs[i], ds[i], i + 1) for i in range(len(ds)))
    proxy = conv[-1].value
    certificates = []
    for n in range(1, levels + 1):
        dn, dn_next = ds[n - 1], ds[n]
        dn_prev = ds[n - 2] if n >= 2 else 1
        f_value = f_values[n - 1]
        cert = LevelCertificate(
            level=n,
            f_value=str(f_value),
            quotient_bound=_at_most(f_value, quotients[n] * dn * dn),
            approximation_bound=_at_most(f_value, dn * dn_next, strict=True),
            recurrence=dn_next == quotients[n] * dn + dn_prev,
            coprime=math.gcd(cs[n - 1], dn) == 1,
        )
        # proxy = c_{L+1}/d_{L+1}: strictly inside for n < L, on the boundary at n = L
        gap = abs(proxy - Fraction(cs[n - 1], dn))
        bound = Fraction(1, dn * dn_next)
        classical = gap < bound if n < levels else gap == bound
        if not (
            cert.quotient_bound
            and cert.approximation_bound
            and cert.recurrence
            and cert.coprime
            and classical
        ):
            raise PrecisionExhaustedError(
                f"certificate failed at level {n}: {cert}; raise the working precision"
            )
        certificates.append(cert)

    target = RealTarget.from_quotients([0, *quotients], truncated=True)
    logger.info(
        f"Constructed beta with {levels} levels, quotients={quotients}, "
        f"denominators={ds}"
    )
    return ConstructionTranscript(target, tuple(quotients), conv, tuple(certificates))
