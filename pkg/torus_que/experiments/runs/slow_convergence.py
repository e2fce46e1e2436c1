"""
Slow convergence - Kronecker maps whose remainders decay no faster than 1/g(N)

beta is built from the growth function g so that its convergents c_n/d_n
approximate it better than 1/F(d_n) with F the generalized inverse of log g.
At level n the dimension N = b_{n+1} d_n^2 and b = b_{n+1} c_n d_n make
T_N(0, d_n) commute with the propagator T_N(-b, a), so a joint eigenbasis
gives |<T_N(0, d_n) psi, psi>| = 1 and the observable
f(p, q) = sum_n e^{-d_n} e(d_n q) keeps a remainder of order 1/g(N).
"""

import json
from dataclasses import asdict, dataclass

import mpmath
import numpy as np

from torus_que.constants import MAX_SIMULATED_DIM, MIN_WORKING_BITS
from torus_que.diophantine import (
    ConstructionTranscript,
    GrowthFunction,
    RealTarget,
    construct_beta,
    generalized_inverse,
    nearest_integer,
    parse_growth,
)
from torus_que.errors import CommutationError, LowerBoundViolationError
from torus_que.experiments.base_experiment import BaseExperiment, ExperimentResult
from torus_que.logger import get_logger
from torus_que.observables import TrigPolynomial, slow_convergence_observable
from torus_que.propagators import KroneckerPropagator
from torus_que.spectra import remainder_profile
from torus_que.weyl import EigenBasis, joint_eigenbasis, weyl_operator

logger = get_logger(__name__)

# Lower bound 1 - e^{-d}/(1 - e^{-d}) at d = 1, which the ratio must respect
RATIO_FLOOR = 0.3
UNIMODULAR_TOLERANCE = 1e-10


@dataclass(frozen=True)
class SlowLevel:
    """Integer data of one constructed level"""

    level: int
    c: int
    d: int
    next_quotient: int
    n: int
    b: int
    a: int

    @property
    def simulated(self) -> bool:
        return self.n <= MAX_SIMULATED_DIM


@dataclass(frozen=True)
class LevelReport:
    level: int
    n: int
    a: int
    b: int
    d: int
    simulated: bool
    unimodular_deviation: float | None = None
    remainder: float | None = None
    ratio: float | None = None
    consistency: float | None = None


def build_levels(
    growth: GrowthFunction, alpha1: RealTarget, levels: int
) -> tuple[ConstructionTranscript, list[SlowLevel]]:
    """Construct beta and the (N, a, b) data of every level"""
    transcript = construct_beta(generalized_inverse(growth.log_g), levels)
    result = []
    for n in range(1, levels + 1):
        conv = transcript.level(n)
        quotient = transcript.next_quotient(n)
        dim = quotient * conv.d * conv.d
        b = quotient * conv.c * conv.d
        if (conv.d * b) % dim != 0 or conv.d * b != conv.c * dim:
            raise CommutationError(
                f"level {n}: d_n * b = {conv.d * b} is not c_n * N = {conv.c * dim}"
            )
        a = nearest_integer(alpha1, dim)
        result.append(SlowLevel(n, conv.c, conv.d, quotient, dim, b, a))
        if dim > MAX_SIMULATED_DIM:
            logger.warning(f"Level {n}: N={dim} constructed, not simulated")
    return transcript, result


def level_observable(levels: list[SlowLevel]) -> TrigPolynomial:
    return slow_convergence_observable(level.d for level in levels)


def joint_basis(level: SlowLevel) -> tuple[KroneckerPropagator, EigenBasis]:
    """Propagator T_N(-b, a) and its joint eigenbasis with T_N(0, d_n)"""
    operator = weyl_operator((-level.b, level.a), level.n)
    prop = KroneckerPropagator(operator, (level.a, level.b))
    shift = weyl_operator((0, level.d), level.n)
    return prop, joint_eigenbasis(prop.operator, shift)


def unimodular_deviation(level: SlowLevel, basis: EigenBasis) -> float:
    """max_j | |<T_N(0, d_n) psi_j, psi_j>| - 1 |"""
    shift = weyl_operator((0, level.d), level.n)
    values = np.sum(shift.apply_columns(basis.vectors) * basis.vectors.conj(), axis=0)
    return float(np.max(np.abs(np.abs(values / level.n) - 1.0)))


def check_level(report: LevelReport) -> None:
    """Raise unless a simulated level keeps both certified bounds

    |<T_N(0, d_n) psi_j, psi_j>| must be 1 to UNIMODULAR_TOLERANCE and
    remainder * g(N) must stay at or above RATIO_FLOOR.
    """
    if not report.simulated:
        return
    if report.unimodular_deviation > UNIMODULAR_TOLERANCE:
        raise LowerBoundViolationError(
            report.level,
            f"unimodular deviation {report.unimodular_deviation:.3e} "
            f"above {UNIMODULAR_TOLERANCE}",
        )
    if report.ratio < RATIO_FLOOR:
        raise LowerBoundViolationError(
            report.level, f"remainder * g(N) = {report.ratio:.4f} below {RATIO_FLOOR}"
        )


def growth_at(growth: GrowthFunction, n: int) -> float:
    with mpmath.workprec(MIN_WORKING_BITS):
        return float(growth.g(n))


class SlowConvergenceExperiment(BaseExperiment):
    name = "slow-conv"
    targeted_result = "remainders bounded below by c/g(N) for a constructed alpha"

    def run(self) -> ExperimentResult:
        self.log_start()
        growth = parse_growth(self.config.growth)
        alpha1 = self.config.targets()[0]
        transcript, levels = build_levels(growth, alpha1, self.config.levels)
        f = level_observable(levels)

        reports = []
        for level in levels:
            if not level.simulated:
                reports.append(
                    LevelReport(level.level, level.n, level.a, level.b, level.d, False)
                )
                continue
            _, basis = joint_basis(level)
            remainder = remainder_profile(basis, f).max
            ratio = remainder * growth_at(growth, level.n)
            report = LevelReport(
                level.level,
                level.n,
                level.a,
                level.b,
                level.d,
                True,
                unimodular_deviation(level, basis),
                remainder,
                ratio,
            )
            logger.info(f"Level {level.level}: N={level.n}, remainder*g(N)={ratio:.4f}")
            check_level(report)
            reports.append(report)

        summary = {
            "alpha": [alpha1.to_spec(), transcript.target.to_spec()],
            "growth": growth.expression,
            "levels": [asdict(r) for r in reports],
            "construction": json.loads(transcript.to_json()),
        }
        paths = [self.write_summary(summary)]
        return ExperimentResult(self.name, reports, summary, paths)
