"""Local polynomial regression with data-driven bandwidths."""
from .asymptotics import AsymptoticSummary, moment_matrices, sandwich, summarize
from .bandwidth import BandwidthResult, CVSearch, OracleSpec, h_amise, h_cv, h_rot
from .density import DensityEstimate, kde, silverman_bandwidth
from .dgp import DgpSpec, simulate_dataset
from .errors import (
    CellFailed,
    DegenerateDensity,
    DegenerateSample,
    DegenerateSpec,
    LocpolyError,
    NoValidBandwidth,
    SingularDesign,
)
from .estimator import Dataset, LocalFit, fit_local, fit_local_loo
from .kernels import BIWEIGHT, EPANECHNIKOV, TRIANGULAR, Kernel, get_kernel

__version__ = "0.1.0"
