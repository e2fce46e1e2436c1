"""
Base Experiment - Base class for all experiment runs
"""

import time
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from torus_que import __version__
from torus_que.constants import LOG_CONFIG_MAX_LENGTH
from torus_que.diophantine import RealTarget, set_minimum_working_bits
from torus_que.errors import ConfigError
from torus_que.experiments.config import ExperimentConfig, schedule_entries
from torus_que.logger import get_logger
from torus_que.spectra import ExactVanishingReport, RateFit, rate_fit
from torus_que.sweep_executor import SweepExecutor
from torus_que.utils import result_path, summarize_mapping, write_csv, write_json

logger = get_logger(__name__)


@dataclass
class ExperimentResult:
    """What a run produced

    Attributes:
        name: experiment name
        data: the sweep, table or report object
        summary: JSON-ready summary written next to the main output
        paths: files written
    """

    name: str
    data: object
    summary: dict = field(default_factory=dict)
    paths: list[Path] = field(default_factory=list)


class BaseExperiment:
    """Base class for experiment runs.

    Provides schedule expansion, timing, provenance headers and the output
    writers; subclasses implement run().
    """

    name: str = ""
    targeted_result: str = ""
    default_schedule: Mapping[str, object] | None = None
    default_observable: Mapping[str, object] | None = None

    def __init__(
        self, config: ExperimentConfig, executor: SweepExecutor | None = None
    ) -> None:
        """Initialize the experiment

        Args:
            config: Validated experiment configuration
            executor: Sweep executor; one is created from config.workers if None
        """
        self.config = config
        self.executor = executor or SweepExecutor(config.workers)
        set_minimum_working_bits(config.working_bits)

    def run(self) -> ExperimentResult:
        """Override this method in subclasses to perform the experiment"""
        raise NotImplementedError

    # ----- schedule and inputs -----------------------------------------

    def schedule(self) -> list[tuple[int, int | None]]:
        schedule = self.config.schedule or self.default_schedule
        if schedule is None:
            return []
        return schedule_entries(schedule)

    def dims(self) -> list[int]:
        return [n for n, _ in self.schedule()]

    def pair_targets(self) -> tuple[RealTarget, RealTarget]:
        """alpha as the two coordinates of a torus translation"""
        alpha = self.config.targets()
        if len(alpha) != 2:
            raise ConfigError(
                f"{self.name} needs alpha = [alpha1, alpha2], got {len(alpha)} entries",
                "alpha",
            )
        return alpha

    def observable(self, radius: int | None = None) -> object:
        return self.config.build_observable(self.default_observable or {}, radius)

    def timed(self, measure: Callable[[], object]) -> tuple[object, float]:
        """(result, seconds); seconds is 0.0 unless timing is recorded"""
        start = time.perf_counter()
        result = measure()
        seconds = time.perf_counter() - start
        return result, seconds if self.config.record_timing else 0.0

    # ----- outputs ------------------------------------------------------

    def output_path(self, suffix: str) -> Path:
        return result_path(self.config.out, self.name, suffix)

    def provenance(self, **extra: object) -> dict[str, object]:
        cfg = self.config
        info: dict[str, object] = {
            "experiment": self.name,
            "result": self.targeted_result,
            "alpha": ", ".join(cfg.alpha),
            "V": cfg.v if cfg.v is not None else "default",
            "observable": cfg.observable or self.default_observable or "none",
            "schedule": cfg.schedule or self.default_schedule or "none",
            "seed": cfg.seed,
        }
        info.update(extra)
        info["version"] = __version__
        return info

    def write_table(
        self,
        header: list[str],
        rows: list[list[str]],
        summary: Mapping[str, object],
        **provenance: object,
    ) -> list[Path]:
        csv_path = write_csv(
            self.output_path(".csv"), header, rows, self.provenance(**provenance)
        )
        return [csv_path, self.write_summary(summary)]

    def write_summary(self, summary: Mapping[str, object]) -> Path:
        document = {"provenance": self.provenance(), **summary}
        return write_json(self.output_path(".json"), document)

    def log_start(self) -> None:
        summary = summarize_mapping(self.config.to_mapping(), LOG_CONFIG_MAX_LENGTH)
        logger.info(f"Starting {self.name}: {summary}")


def fit_summary(fit: RateFit | ExactVanishingReport | None) -> dict[str, object] | None:
    if fit is None:
        return None
    if isinstance(fit, ExactVanishingReport):
        return {"exact_vanishing_count": fit.exact_vanishing_count}
    return {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "points": fit.points,
        "exact_vanishing_count": fit.exact_vanishing_count,
    }


def safe_fit(rows: object, column: str = "remainder_max") -> dict[str, object] | None:
    """rate_fit summary, or None when there are too few positive rows"""
    try:
        return fit_summary(rate_fit(rows, column))
    except ValueError as e:
        logger.info(f"No rate fit: {e}")
        return None
