"""Error-inhibiting two-derivative general linear methods."""
from .errors import EisGlmError
from .fileformat import load_tableau, read_tableau, save_tableau
from .harness import convergence_study, dahlquist_problem, vdp_problem
from .kernels import BACKEND
from .postproc import apply_filter, build_filter, postprocess
from .registry import get_method, registry
from .stability import amplification, check_a_stability, scan_region
from .stepper import NewtonConfig, OdeProblem, integrate
from .tableau import (
    Family,
    Kind,
    MethodTableau,
    compute_tau,
    recover_abscissas,
    verify_eis,
    verify_order,
)

__version__ = "0.1.0"
