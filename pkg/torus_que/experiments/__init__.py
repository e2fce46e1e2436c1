"""
Torus QUE Experiments Package
"""

from torus_que.errors import ConfigError
from torus_que.experiments.base_experiment import BaseExperiment, ExperimentResult
from torus_que.experiments.config import EXPERIMENT_NAMES, ExperimentConfig
from torus_que.experiments.runs import (
    DiophantineScanExperiment,
    EgorovExperiment,
    PerturbedExperiment,
    PerturbedSlowExperiment,
    QueKroneckerExperiment,
    SlowConvergenceExperiment,
)

EXPERIMENTS: dict[str, type[BaseExperiment]] = {
    cls.name: cls
    for cls in (
        QueKroneckerExperiment,
        SlowConvergenceExperiment,
        PerturbedExperiment,
        PerturbedSlowExperiment,
        EgorovExperiment,
        DiophantineScanExperiment,
    )
}


def get_experiment(name: str) -> type[BaseExperiment]:
    try:
        return EXPERIMENTS[name]
    except KeyError:
        raise ConfigError(
            f"unknown experiment {name!r}; "
            f"expected one of {', '.join(EXPERIMENT_NAMES)}",
            "experiment",
        ) from None


__all__ = [
    "EXPERIMENTS",
    "BaseExperiment",
    "ExperimentConfig",
    "ExperimentResult",
    "get_experiment",
]
