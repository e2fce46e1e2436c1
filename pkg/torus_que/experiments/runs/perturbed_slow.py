"""
Slow convergence for perturbed Kronecker maps

Same constructed alpha as the slow-convergence run. The joint eigenbasis of
each level is transported by U_h^-1 and tested against f . Phi_h^-1, so the
perturbed matrix elements track the unperturbed ones up to the conjugated
Egorov defect.
"""

from dataclasses import asdict

import numpy as np

from torus_que.diophantine import parse_growth
from torus_que.experiments.base_experiment import BaseExperiment, ExperimentResult
from torus_que.experiments.runs.slow_convergence import (
    RATIO_FLOOR,
    LevelReport,
    build_levels,
    growth_at,
    joint_basis,
    level_observable,
    unimodular_deviation,
)
from torus_que.logger import get_logger
from torus_que.observables import (
    SmoothTruncation,
    TrigPolynomial,
    compose_shear,
    quantize,
)
from torus_que.propagators import (
    PerturbedPropagator,
    antiderivative,
    calibrate_sign,
    h_series,
    perturbed_eigenbasis,
    shear,
)
from torus_que.spectra import remainder_profile

logger = get_logger(__name__)


class PerturbedSlowExperiment(BaseExperiment):
    name = "perturbed-slow"
    targeted_result = "remainders bounded below by c/g(N) for a perturbed Kronecker map"

    def run(self) -> ExperimentResult:
        self.log_start()
        growth = parse_growth(self.config.growth)
        alpha1 = self.config.targets()[0]
        v = self.config.shear_profile()
        transcript, levels = build_levels(growth, alpha1, self.config.levels)
        f = level_observable(levels)

        calibration = calibrate_sign(v)
        if v.coeffs:
            h = h_series(v, alpha1)
            ftilde = compose_shear(f, -h.poly)
        else:
            h = SmoothTruncation(TrigPolynomial.zero(), 0, 0.0)
            ftilde = SmoothTruncation(f, f.support_radius(), 0.0)

        reports = []
        for level in levels:
            if not level.simulated:
                reports.append(
                    LevelReport(level.level, level.n, level.a, level.b, level.d, False)
                )
                continue
            kron, basis = joint_basis(level)
            conj = shear(antiderivative(-h.poly), level.n, calibration.sign)
            prop = PerturbedPropagator(kron, conj, h)
            moved = perturbed_eigenbasis(prop, basis)

            remainder = remainder_profile(moved, ftilde.poly).max
            ratio = remainder * growth_at(growth, level.n)
            quantized = quantize(ftilde.poly, level.n)
            perturbed_elements = quantized.diagonal_elements(moved.vectors)
            plain_elements = quantize(f, level.n).diagonal_elements(basis.vectors)
            consistency = float(np.max(np.abs(perturbed_elements - plain_elements)))
            reports.append(
                LevelReport(
                    level.level,
                    level.n,
                    level.a,
                    level.b,
                    level.d,
                    True,
                    unimodular_deviation(level, basis),
                    remainder,
                    ratio,
                    consistency,
                )
            )
            logger.info(
                f"Level {level.level}: N={level.n}, remainder*g(N)={ratio:.4f}, "
                f"conjugation gap {consistency:.2e}"
            )
            if ratio < RATIO_FLOOR:
                logger.warning(
                    f"Level {level.level}: ratio {ratio:.4f} below {RATIO_FLOOR}"
                )

        summary = {
            "alpha": [alpha1.to_spec(), transcript.target.to_spec()],
            "growth": growth.expression,
            "shear_sign": calibration.sign,
            "h_tail": h.tail_bound,
            "observable_tail": ftilde.tail_bound,
            "levels": [asdict(r) for r in reports],
        }
        paths = [self.write_summary(summary)]
        return ExperimentResult(self.name, reports, summary, paths)
