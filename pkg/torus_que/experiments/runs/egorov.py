"""
Egorov defect table

For each N, measures ||U^-1 Op_N(f) U - Op_N(f . A)|| and the largest
eigenbasis matrix element of the same difference for four quantized maps:

    kronecker             U_tau against tau_{a/N} (exact)
    kronecker-irrational  U_tau against tau_alpha, next to the rigorous bound
    shear                 U_W against Phi_V
    perturbed             U_N against tau_alpha . Phi_V
"""

from fractions import Fraction

import mpmath

from torus_que.constants import EGOROV_CSV_HEADER, EXACT_ZERO_CLAMP, MIN_WORKING_BITS
from torus_que.diophantine import RealTarget
from torus_que.experiments.base_experiment import (
    BaseExperiment,
    ExperimentResult,
    safe_fit,
)
from torus_que.experiments.config import default_geometric
from torus_que.logger import get_logger
from torus_que.observables import (
    SmoothTruncation,
    TrigPolynomial,
    as_polynomial,
    compose_shear,
    compose_translation,
)
from torus_que.propagators import (
    DefectRecord,
    antiderivative,
    calibrate_sign,
    eigenbasis,
    egorov_defect,
    h_series,
    kronecker,
    kronecker_egorov_bound,
    perturbed,
    perturbed_eigenbasis,
    shear,
)
from torus_que.weyl import eigenbasis_monomial, weyl_operator

logger = get_logger(__name__)

ROW_NAMES = ("kronecker", "kronecker-irrational", "shear", "perturbed")


def _cell(value: float | None) -> str:
    return "" if value is None else repr(value)


def _clamped(value: float | None) -> float | None:
    if value is None:
        return None
    return 0.0 if value <= EXACT_ZERO_CLAMP else value


def irrational_shift(alpha: tuple[RealTarget, ...]) -> tuple[mpmath.mpf, ...]:
    bits = MIN_WORKING_BITS * 2
    with mpmath.workprec(bits):
        return tuple(t.evaluate(bits) for t in alpha)


class EgorovExperiment(BaseExperiment):
    name = "egorov"
    targeted_result = "exact Egorov for Kronecker maps and defect rates for shears"
    default_schedule = default_geometric()
    default_observable = {"family": "random", "terms": 6, "radius": 3}

    def run(self) -> ExperimentResult:
        self.log_start()
        alpha = self.pair_targets()
        v = self.config.shear_profile()
        f = as_polynomial(self.observable())
        max_dense = self.config.max_dense

        calibration = calibrate_sign(v)
        shift = irrational_shift(alpha)
        translated = compose_translation(f, shift)
        f_sheared = compose_shear(f, v)
        f_perturbed = compose_shear(translated, v)
        if v.coeffs and not alpha[0].is_rational:
            h = h_series(v, alpha[0])
        else:
            h = SmoothTruncation(TrigPolynomial.zero(), 0, 0.0)
        w = antiderivative(v)
        bounds: dict[int, float] = {}

        def measure(n: int) -> dict[str, DefectRecord]:
            prop = kronecker(alpha, n)
            basis = eigenbasis(prop)
            a1, a2 = prop.a
            exact = compose_translation(f, (Fraction(a1, n), Fraction(a2, n)))
            records = {
                "kronecker": egorov_defect(prop, f, exact, basis, max_dense),
                "kronecker-irrational": egorov_defect(
                    prop, f, translated, basis, max_dense
                ),
            }
            bounds[n] = kronecker_egorov_bound(f, alpha, n)

            shear_basis = eigenbasis_monomial(weyl_operator((-1, 1), n))
            records["shear"] = egorov_defect(
                shear(w, n, calibration.sign), f, f_sheared, shear_basis, max_dense
            )
            if h.poly.coeffs or not v.coeffs:
                moved = perturbed(alpha, v, n, calibration.sign, h)
                records["perturbed"] = egorov_defect(
                    moved, f, f_perturbed, perturbed_eigenbasis(moved), max_dense
                )
            return records

        table = self.executor.run(self.dims(), measure)

        rows = []
        fits: dict[str, object] = {}
        defects: dict[str, dict[str, float | None]] = {}
        for name in ROW_NAMES:
            series = []
            for n, records in table.items():
                if name not in records:
                    continue
                record = records[name]
                element = _clamped(record.matrix_element)
                norm = _clamped(record.operator_norm)
                tail = repr(record.tail_budget)
                rows.append([name, str(n), _cell(norm), _cell(element), tail])
                series.append((n, norm if norm is not None else element))
            if series:
                fits[name] = safe_fit(series)
                defects[name] = {str(n): d for n, d in series}
                worst = max(d for _, d in series)
                logger.info(f"Egorov {name}: max defect {worst:.3e}")

        summary = {
            "shear_sign": calibration.sign,
            "defects": defects,
            "fits": fits,
            "kronecker_irrational_bounds": {
                str(n): b for n, b in sorted(bounds.items())
            },
            "shear_tail": f_sheared.tail_bound,
            "perturbed_tail": f_perturbed.tail_bound,
        }
        paths = self.write_table(
            list(EGOROV_CSV_HEADER), rows, summary, shear_sign=calibration.sign
        )
        return ExperimentResult(self.name, rows, summary, paths)
