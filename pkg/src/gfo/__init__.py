"""Grasp force optimization toolkit.

Modules
-------
linalg
    Symmetric eigenvalues (cyclic Jacobi) and PSD tests.
inequalities
    Linear and bilinear matrix inequalities, the rank-relaxed lift, and
    rank-one recovery.
kkt
    Inequality-form LPs, the projected KKT flow, and its Euler integrator.
neural
    Collocation ansatz, manual backprop training, and the LP front end.
grasp
    Contacts, grasp maps, friction/torque pencils, force-closure
    certificates, and scenario-to-LP extraction.
quality
    Discretized wrench sets and the largest-minimum-resisted-wrench
    quality measure (exact facet enumeration or sampled bound).
cli
    File-driven command line front end over all of the above.

Hot kernels run on a compiled backend when the extension is built; set
GFO_BACKEND=python to force the numpy fallback (see gfo._backend).
"""

__version__ = "0.1.0"

from ._backend import BACKEND as kernel_backend
from .grasp import (
    Contact,
    GraspScenario,
    force_closure_certificate,
    grasp_map,
    scenario_to_lp,
)
from .inequalities import Bmi, Lmi, bmi_to_sdp, rank_one_recover
from .kkt import KktState, LpProblem, integrate, kkt_residual
from .neural import TrainConfig, ansatz, solve_lp_nn, train
from .quality import grasp_wrench_set, q_lrw_exact, q_lrw_sampled

__all__ = [
    "kernel_backend",
    "Contact",
    "GraspScenario",
    "force_closure_certificate",
    "grasp_map",
    "scenario_to_lp",
    "Bmi",
    "Lmi",
    "bmi_to_sdp",
    "rank_one_recover",
    "KktState",
    "LpProblem",
    "integrate",
    "kkt_residual",
    "TrainConfig",
    "ansatz",
    "solve_lp_nn",
    "train",
    "grasp_wrench_set",
    "q_lrw_exact",
    "q_lrw_sampled",
    "__version__",
]
