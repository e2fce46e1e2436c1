"""
Experiment runs, one per CLI subcommand
"""

from torus_que.experiments.runs.dioph_scan import DiophantineScanExperiment
from torus_que.experiments.runs.egorov import EgorovExperiment
from torus_que.experiments.runs.perturbed import PerturbedExperiment
from torus_que.experiments.runs.perturbed_slow import PerturbedSlowExperiment
from torus_que.experiments.runs.que_kronecker import QueKroneckerExperiment
from torus_que.experiments.runs.slow_convergence import SlowConvergenceExperiment

__all__ = [
    "DiophantineScanExperiment",
    "EgorovExperiment",
    "PerturbedExperiment",
    "PerturbedSlowExperiment",
    "QueKroneckerExperiment",
    "SlowConvergenceExperiment",
]
