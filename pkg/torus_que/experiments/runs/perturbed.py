"""
QUE rate for perturbed Kronecker maps

Calibrates the shear sign once, then sweeps N measuring remainders in the
transported eigenbasis psi_j = U_h^-1 psi_j^tau. Each remainder splits as

    <Op_N(f) psi_j, psi_j> - mean(f)
        = <(U_h Op_N(f) U_h^-1 - Op_N(f . Phi_h)) psi_j^tau, psi_j^tau>
        + <Op_N(f . Phi_h) psi_j^tau, psi_j^tau> - mean(f . Phi_h)

The first term is the conjugation defect, bounded by the Egorov estimate for
shears and fitted on its own (operator norm below the dense guard, matrix
element always). The second is a plain Kronecker remainder of the sheared
observable; it only sees frequencies of f . Phi_h resonant at level N, and at
desk scale those dominate the full remainder.
"""

import dataclasses

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
)
from torus_que.propagators import (
    calibrate_sign,
    check_diophantine,
    egorov_defect,
    h_series,
    perturbed,
    perturbed_eigenbasis,
)
from torus_que.spectra import (
    MatrixElementSweep,
    SweepRow,
    rate_fit_windows,
    remainder_profile,
    resonant_count,
    sweep_row,
)
from torus_que.weyl import eigenbasis_monomial

logger = get_logger(__name__)


@dataclasses.dataclass(frozen=True)
class RemainderSplit:
    """Both parts of the perturbed remainder at one N

    Attributes:
        conjugation_element: max_j of the conjugation defect on psi_j^tau
        conjugation_norm: operator norm of the same defect, None above the guard
        sheared_remainder: Kronecker remainder of f . Phi_h (raw, unclamped)
        sheared_resonances: nonconstant frequencies of f . Phi_h resonant at N
    """

    conjugation_element: float
    conjugation_norm: float | None
    sheared_remainder: float
    sheared_resonances: int


class PerturbedExperiment(BaseExperiment):
    name = "perturbed"
    targeted_result = "remainders of order N^-2 for perturbed Kronecker maps"
    default_schedule = default_geometric()
    default_observable = {"family": "exponential", "decay": 1.0}

    def run(self) -> ExperimentResult:
        self.log_start()
        alpha = self.pair_targets()
        v = self.config.shear_profile()
        f = self.observable()
        poly = as_polynomial(f)
        max_dense = self.config.max_dense

        calibration = calibrate_sign(v)
        if v.coeffs:
            check_diophantine(alpha[0])
            h = h_series(v, alpha[0])
            f_sheared = compose_shear(poly, h.poly)
        else:
            h = SmoothTruncation(TrigPolynomial.zero(), 0, 0.0)
            f_sheared = poly
        splits: dict[int, RemainderSplit] = {}

        def measure(n: int) -> SweepRow:
            def row() -> SweepRow:
                prop = perturbed(alpha, v, n, calibration.sign, h)
                result = sweep_row(prop, f, perturbed_eigenbasis(prop))
                kron_basis = eigenbasis_monomial(prop.kron.operator)
                record = egorov_defect(
                    prop.conj.inverse(), poly, f_sheared, kron_basis, max_dense
                )
                splits[n] = RemainderSplit(
                    record.matrix_element,
                    record.operator_norm,
                    remainder_profile(kron_basis, f_sheared).raw_max,
                    resonant_count(prop.kron.a, n, as_polynomial(f_sheared)),
                )
                return result

            result, seconds = self.timed(row)
            return dataclasses.replace(result, seconds=seconds)

        rows = self.executor.run(self.dims(), measure)
        sweep = MatrixElementSweep(
            ", ".join(self.config.alpha),
            str(self.config.observable or self.default_observable),
            list(rows.values()),
        )
        ordered = sorted(splits.items())
        elements = [(n, s.conjugation_element) for n, s in ordered]
        dense = [(n, s) for n, s in ordered if s.conjugation_norm is not None]
        norms = [(n, s.conjugation_norm) for n, s in dense]

        summary: dict[str, object] = {
            "shear_sign": calibration.sign,
            "calibration_slopes": {str(k): s for k, s in calibration.slopes.items()},
            "h_tail": h.tail_bound,
            "observable_tail": getattr(f, "tail_bound", 0.0),
            "sheared_tail": getattr(f_sheared, "tail_bound", 0.0),
            "fit": safe_fit(sweep),
            "fit_mean": safe_fit(sweep, "remainder_mean"),
            "fit_windows": [
                {"first": lo, "last": hi, "slope": getattr(fit, "slope", None)}
                for lo, hi, fit in rate_fit_windows(sweep)
            ],
            "conjugation_defects": {str(n): d for n, d in elements},
            "conjugation_fit": safe_fit(elements),
            "conjugation_norms": {str(n): d for n, d in norms},
            "conjugation_norm_fit": safe_fit(norms) if norms else None,
            "sheared_remainders": {str(n): s.sheared_remainder for n, s in ordered},
            "sheared_resonances": {str(n): s.sheared_resonances for n, s in ordered},
        }
        for key, label in (("fit", "remainder"), ("conjugation_norm_fit", "defect")):
            fit = summary[key]
            if fit and "slope" in fit:
                logger.info(
                    f"Perturbed {label} slope {fit['slope']:.3f} "
                    f"(R2 {fit['r_squared']:.3f})"
                )

        paths = self.write_table(
            sweep.csv_header(), sweep.csv_rows(), summary, shear_sign=calibration.sign
        )
        return ExperimentResult(self.name, sweep, summary, paths)
