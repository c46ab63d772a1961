"""Heteroscedastic linear regression: OLS, spectral noise model, WLS,
pseudogradient phase retrieval and the alternating SymbLearn procedure."""
from .errors import (
    ConvergenceError,
    DataFormatError,
    HetRegError,
    InsufficientSamplesError,
    InvalidArgumentError,
    InvalidParameterError,
    SingularDesignError,
)
from .estimators import (
    EstimateReport,
    IterationDiag,
    PhaseRetrievalParams,
    SymbLearnConfig,
    WlsParams,
    ols,
    phase_retrieval,
    pseudogradient,
    schedule_lambda,
    schedule_mu,
    schedule_s,
    spectral,
    symblearn,
    symblearn_mult,
    wls,
)
from .harness import ExperimentSpec, RateFit, TrialRecord, fit_rate, run_grid, run_trial
from .kernels import BACKEND
from .model import Dataset, ProblemInstance, err_f, err_w, partition, random_instance, sample_dataset
from .numerics import RngStream, make_stream, solve_spd, std_normal, top_eigenpair

__version__ = "0.1.0"
