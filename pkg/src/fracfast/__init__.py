"""Fast, memory-compressed Caputo derivatives and time-fractional diffusion solvers."""

from fracfast.caputo import (
    CaputoStepper,
    SchemeConfig,
    direct_l1,
    direct_l12,
    evaluate_samples,
    faom_eval,
    faompk_eval,
)
from fracfast.history import HistoryLedger, check_structure, recombine_moments
from fracfast.kernel import KernelPolynomial
from fracfast.pde import GridSpec, ProblemSpec, SolveResult, run

__all__ = [
    "CaputoStepper", "GridSpec", "HistoryLedger", "KernelPolynomial", "ProblemSpec",
    "SchemeConfig", "SolveResult", "check_structure", "direct_l1", "direct_l12",
    "evaluate_samples", "faom_eval", "faompk_eval", "recombine_moments", "run",
]
__version__ = "0.1.0"
