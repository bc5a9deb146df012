"""Partition function of the 8VSOS model with domain-wall boundary conditions.

Theta-function kernels, the DWBC height-matrix state space, several
independent evaluators of the partition function and the root-of-unity
enumerations derived from them.
"""

from .errors import DomainError, NumericError, PoleError, ResourceError, SosdwError, ValidationError
from .kernels import backend
from .partition import (
    EVALUATORS,
    SpectralParams,
    sample_context,
    sample_params,
    z_bruteforce,
    z_factored_sum,
    z_free_fermion,
    z_ik_sum,
    z_laurent,
    z_root_of_unity,
    z_sixvertex_ik,
    z_tilde,
    z_weightfunction,
)
from .states import (
    AlternatingSignMatrix,
    HeightMatrix,
    a_n,
    c_n,
    enumerate_states,
    statistics,
    statistics_table,
)
from .theta import ThetaContext, bracket, frobenius_det, qpoch, theta

__version__ = "0.1.0"

__all__ = [
    "AlternatingSignMatrix",
    "DomainError",
    "EVALUATORS",
    "HeightMatrix",
    "NumericError",
    "PoleError",
    "ResourceError",
    "SosdwError",
    "SpectralParams",
    "ThetaContext",
    "ValidationError",
    "a_n",
    "backend",
    "bracket",
    "c_n",
    "enumerate_states",
    "frobenius_det",
    "qpoch",
    "sample_context",
    "sample_params",
    "statistics",
    "statistics_table",
    "theta",
    "z_bruteforce",
    "z_factored_sum",
    "z_free_fermion",
    "z_ik_sum",
    "z_laurent",
    "z_root_of_unity",
    "z_sixvertex_ik",
    "z_tilde",
    "z_weightfunction",
]
