"""
Diophantine scan - finite-range evidence for the quality of alpha

Scans |n . alpha + k| ||n||^gamma over growing boxes (so the estimate is
visibly nonincreasing), scans each coordinate alone, and lists the leading
convergents of every target.
"""

import json

from torus_que.diophantine import DiophantineReport, convergents, diophantine_scan
from torus_que.experiments.base_experiment import BaseExperiment, ExperimentResult
from torus_que.logger import get_logger

logger = get_logger(__name__)

CONVERGENT_COUNT = 12


def box_sizes(n_max: int) -> list[int]:
    """Doubling box sizes ending at n_max"""
    sizes = []
    size = n_max
    while size >= 1:
        sizes.append(size)
        size //= 2
    return sorted(set(sizes))


class DiophantineScanExperiment(BaseExperiment):
    name = "dioph-scan"
    targeted_result = "finite-range diophantine constants for alpha"

    def run(self) -> ExperimentResult:
        self.log_start()
        alpha = self.config.targets()
        gamma = self.config.gamma
        n_max = self.config.n_max

        report = diophantine_scan(alpha, gamma, n_max)
        growth = [diophantine_scan(alpha, gamma, size) for size in box_sizes(n_max)]
        single: list[DiophantineReport] = []
        if len(alpha) > 1:
            single = [diophantine_scan([t], gamma, n_max) for t in alpha]
        logger.info(
            f"c({', '.join(report.alpha)}) ~ {report.c_estimate:.4e} "
            f"at gamma={gamma}, witness {report.worst_witness}"
        )

        summary = {
            "scan": json.loads(report.to_json()),
            "by_box": [
                {
                    "n_max": r.n_max,
                    "c_estimate": r.c_estimate,
                    "worst_witness": list(r.worst_witness),
                }
                for r in growth
            ],
            "coordinates": [json.loads(r.to_json()) for r in single],
            "convergents": {
                t.to_spec(): [[c.c, c.d] for c in convergents(t, CONVERGENT_COUNT)]
                for t in alpha
            },
        }
        paths = [self.write_summary(summary)]
        return ExperimentResult(self.name, report, summary, paths)
