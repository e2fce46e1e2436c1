"""
QUE for Kronecker maps - remainders over a schedule of N

For a trig-polynomial observable every remainder vanishes exactly once N is
past the last resonance; the run reports that threshold and cross-checks it
against the per-frequency resonance scan. Smooth observables get a rate fit.
"""

import dataclasses

from torus_que.diophantine import QUADRATIC, RealTarget
from torus_que.experiments.base_experiment import (
    BaseExperiment,
    ExperimentResult,
    safe_fit,
)
from torus_que.logger import get_logger
from torus_que.observables import SmoothTruncation, TrigPolynomial, as_polynomial
from torus_que.propagators import eigenbasis, kronecker
from torus_que.spectra import (
    MatrixElementSweep,
    SweepRow,
    rate_fit_windows,
    sweep_row,
    vanishing_threshold,
)

logger = get_logger(__name__)


def _squarefree_part(d: int) -> int:
    part, k = 1, 2
    while k * k <= d:
        while d % (k * k) == 0:
            d //= k * k
        if d % k == 0:
            part *= k
            d //= k
        k += 1
    return part * d


def uniquely_ergodic_hint(alpha: tuple[RealTarget, ...]) -> bool:
    """False when 1, alpha_1, alpha_2 are visibly rationally dependent

    Catches rational entries and two surds from the same quadratic field
    sharing a rational relation; anything else is assumed independent.
    """
    if any(t.is_rational for t in alpha):
        return False
    if len(alpha) == 2 and all(t.kind == QUADRATIC for t in alpha):
        d1, d2 = (t.quadratic[2] for t in alpha)
        if _squarefree_part(d1) == _squarefree_part(d2):
            return False
    return True


class QueKroneckerExperiment(BaseExperiment):
    name = "que-kron"
    targeted_result = "exact vanishing of Kronecker remainders for trig polynomials"
    default_schedule = {"range": {"start": 2, "stop": 400}}
    default_observable = {"family": "monomial", "n": [1, 1]}

    def run(self) -> ExperimentResult:
        self.log_start()
        alpha = self.pair_targets()
        schedule = self.schedule()
        radii = {n: r for n, r in schedule if r is not None}
        observables: dict[int, object] | None = None
        if radii:
            observables = {n: self.observable(radius=radii.get(n)) for n, _ in schedule}
        f = self.observable()

        def measure(n: int) -> SweepRow:
            fn = observables[n] if observables else f

            def row() -> SweepRow:
                prop = kronecker(alpha, n)
                return sweep_row(prop, fn, eigenbasis(prop))

            result, seconds = self.timed(row)
            return dataclasses.replace(result, seconds=seconds)

        rows = self.executor.run([n for n, _ in schedule], measure)
        sweep = MatrixElementSweep(
            ", ".join(self.config.alpha),
            str(self.config.observable or self.default_observable),
            list(rows.values()),
        )

        regime = "uniquely ergodic" if uniquely_ergodic_hint(alpha) else "non-UE regime"
        summary: dict[str, object] = {"regime": regime, "rows": len(sweep.rows)}
        if isinstance(f, TrigPolynomial):
            threshold = sweep.exact_zero_threshold()
            predicted = self._predicted_threshold(alpha, f, sweep.dims)
            summary["exact_zero_threshold"] = threshold
            summary["predicted_threshold"] = predicted
            logger.info(
                f"Exact-zero threshold N0={threshold} "
                f"(resonance scan predicts {predicted})"
            )
        else:
            summary["fit"] = safe_fit(sweep)
            summary["fit_mean"] = safe_fit(sweep, "remainder_mean")
            summary["fit_windows"] = [
                {"first": lo, "last": hi, "slope": getattr(fit, "slope", None)}
                for lo, hi, fit in rate_fit_windows(sweep)
            ]
        if radii:
            summary["truncation"] = {
                str(n): {"radius": r, "tail": observables[n].tail_bound}
                for n, r in radii.items()
                if isinstance(observables[n], SmoothTruncation)
            }
        if regime != "uniquely ergodic":
            logger.warning(f"alpha = {self.config.alpha} is in the {regime}")

        paths = self.write_table(
            sweep.csv_header(), sweep.csv_rows(), summary, regime=regime
        )
        logger.info(f"{self.name} finished with {len(sweep.rows)} rows")
        return ExperimentResult(self.name, sweep, summary, paths)

    @staticmethod
    def _predicted_threshold(
        alpha: tuple[RealTarget, ...], f: TrigPolynomial, dims: list[int]
    ) -> int | None:
        """Latest per-frequency vanishing threshold over f's nonconstant terms"""
        thresholds = [
            vanishing_threshold(alpha, k, dims)
            for k in as_polynomial(f).coeffs
            if k != (0, 0)
        ]
        if not thresholds:
            return dims[0] if dims else None
        if any(t is None for t in thresholds):
            return None
        return max(thresholds)
