"""Grasp maps, cone and effort inequalities, and force-closure checks.

A grasp is a set of frictional point contacts on a rigid object.  This
module builds the 6 x 3k grasp map, expresses the friction-cone and
joint-effort conditions as linear matrix inequalities, extracts the
linear part as an LP for the dynamical solver, and evaluates the
force-closure certificate on candidate contact forces.
"""

from dataclasses import dataclass, field

import numpy as np

from .inequalities import Lmi, lmi_feasible
from .kkt import LpProblem
from .linalg import skew, sym_eigvals, vec3

AXIS_TOL = 1e-9

ROW_SENSES = ("geq", "leq")


@dataclass(frozen=True)
class Contact:
    """Frictional point contact: position, inward unit normal, friction.

    Position and axis accept a Vec3 or any length-3 sequence and are
    stored as float arrays.
    """

    position: object
    axis: object
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "position", vec3(self.position))
        object.__setattr__(self, "axis", vec3(self.axis))
        object.__setattr__(self, "mu", float(self.mu))
        norm = np.linalg.norm(self.axis)
        if abs(norm - 1.0) > AXIS_TOL:
            raise ValueError(f"contact axis must be unit length, got norm {norm}")
        if self.mu < 0.0:
            raise ValueError("friction coefficient must be nonnegative")


@dataclass
class GraspScenario:
    """Contacts plus the hand-side data needed for feasibility analysis.

    ``hand_jacobian`` maps joint torques to contact wrenches; its
    transpose is what enters the effort bounds.  Scenarios built from
    aggregate published constraints may omit the hand data entirely and
    carry ``extra_linear_rows`` instead: each row is a tuple
    ``(coefficients, rhs, sense)`` with sense "geq" or "leq".
    """

    contacts: list = field(default_factory=list)
    hand_jacobian: object = None
    tau_lower: object = None
    tau_upper: object = None
    tau_ext: object = None
    external_load: object = None
    epsilon: float = 1e-3
    extra_linear_rows: list = field(default_factory=list)

    def __post_init__(self):
        self.contacts = list(self.contacts)
        for c in self.contacts:
            if not isinstance(c, Contact):
                raise ValueError("contacts must be Contact instances")
        self.epsilon = float(self.epsilon)
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")

        if self.hand_jacobian is not None:
            self.hand_jacobian = np.asarray(self.hand_jacobian, dtype=float)
            if self.hand_jacobian.ndim != 2:
                raise ValueError("hand jacobian must be a matrix")
            if self.contacts and self.hand_jacobian.shape[0] != self.wrench_dim:
                raise ValueError(
                    f"hand jacobian has {self.hand_jacobian.shape[0]} rows, "
                    f"expected {self.wrench_dim}"
                )
            q = self.hand_jacobian.shape[1]
            for name in ("tau_lower", "tau_upper", "tau_ext"):
                v = getattr(self, name)
                if v is None:
                    raise ValueError(f"{name} required alongside hand jacobian")
                v = np.asarray(v, dtype=float).reshape(-1)
                if v.shape != (q,):
                    raise ValueError(f"{name} must have length {q}")
                setattr(self, name, v)
            if np.any(self.tau_lower > self.tau_upper):
                raise ValueError("tau_lower must not exceed tau_upper")
        elif any(
            v is not None for v in (self.tau_lower, self.tau_upper, self.tau_ext)
        ):
            raise ValueError("torque bounds require a hand jacobian")

        if self.external_load is None:
            self.external_load = np.zeros(6)
        self.external_load = np.asarray(self.external_load, dtype=float).reshape(-1)
        if self.external_load.shape != (6,):
            raise ValueError("external load must have 6 components")

        self.extra_linear_rows = [
            _check_row(row, i) for i, row in enumerate(self.extra_linear_rows)
        ]
        widths = {len(r[0]) for r in self.extra_linear_rows}
        if len(widths) > 1:
            raise ValueError("extra linear rows disagree on variable count")

    @property
    def wrench_dim(self):
        return 3 * len(self.contacts)

    @property
    def joint_count(self):
        if self.hand_jacobian is None:
            return 0
        return self.hand_jacobian.shape[1]


def _check_row(row, index):
    try:
        coeffs, rhs, sense = row
    except (TypeError, ValueError):
        raise ValueError(
            f"extra linear row {index} must be (coefficients, rhs, sense)"
        ) from None
    coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
    if coeffs.size == 0:
        raise ValueError(f"extra linear row {index} has no coefficients")
    if sense not in ROW_SENSES:
        raise ValueError(f"extra linear row {index} sense must be one of {ROW_SENSES}")
    return (coeffs, float(rhs), sense)


@dataclass(frozen=True)
class ForceClosureReport:
    """Outcome of the three force-closure conditions for one force set."""

    lambda_min: float
    grasp_map_ok: bool
    equilibrium_residual: float
    equilibrium_ok: bool
    cone_margins: tuple
    cone_ok: tuple

    @property
    def passed(self):
        return self.grasp_map_ok and self.equilibrium_ok and all(self.cone_ok)


def grasp_map(contacts):
    """Stack [I; skew(p_i)] column blocks mapping contact forces to wrenches.

    Forces are expressed in the object frame, so the force rows are
    identities and only the moment rows depend on contact placement.
    """
    if len(contacts) == 0:
        raise ValueError("grasp map needs at least one contact")
    blocks = []
    eye = np.eye(3)
    for c in contacts:
        top = eye
        bottom = skew(c.position)
        blocks.append(np.vstack([top, bottom]))
    return np.hstack(blocks)


def weighted_norm_pcwf(x_i, mu):
    """Tangential magnitude scaled by 1/mu for the point-contact model."""
    mu = float(mu)
    if mu <= 0.0:
        raise ValueError("weighted norm needs mu > 0")
    x_i = np.asarray(x_i, dtype=float).reshape(-1)
    if x_i.shape != (3,):
        raise ValueError("contact wrench must have 3 components")
    return float(np.hypot(x_i[0], x_i[1]) / mu)


def _friction_basis(mu):
    # dP/dx1, dP/dx2, dP/dx3 of the 3x3 cone block
    s1 = np.zeros((3, 3))
    s1[0, 2] = s1[2, 0] = 1.0
    s2 = np.zeros((3, 3))
    s2[1, 2] = s2[2, 1] = 1.0
    s3 = mu * np.eye(3)
    return s1, s2, s3


def friction_lmi(contacts):
    """Block-diagonal cone constraint P(x) >= 0 as a linear pencil.

    Variable l of contact i places a constant symmetric basis matrix in
    block i; the pencil has no constant term.
    """
    if len(contacts) == 0:
        raise ValueError("friction constraint needs at least one contact")
    k = len(contacts)
    dim = 3 * k
    f0 = np.zeros((dim, dim))
    fi = []
    for i, c in enumerate(contacts):
        lo = 3 * i
        for basis in _friction_basis(c.mu):
            placed = np.zeros((dim, dim))
            placed[lo : lo + 3, lo : lo + 3] = basis
            fi.append(placed)
    return Lmi(f0, fi, sense="geq")


def torque_lmi(scenario):
    """Diagonal pencil encoding lower and upper joint-effort bounds."""
    if scenario.hand_jacobian is None:
        raise ValueError("scenario has no hand jacobian")
    jt = scenario.hand_jacobian.T
    q, m = jt.shape
    lower_const = scenario.tau_ext - scenario.tau_lower
    upper_const = scenario.tau_upper - scenario.tau_ext
    f0 = np.diag(np.concatenate([lower_const, upper_const]))
    fi = []
    for l in range(m):
        col = jt[:, l]
        fi.append(np.diag(np.concatenate([col, -col])))
    return Lmi(f0, fi, sense="geq")


def combined_lmi(scenario):
    """Concatenate cone and effort pencils on a shared variable vector."""
    fric = friction_lmi(scenario.contacts)
    tor = torque_lmi(scenario)
    m = len(fric.fi)
    if len(tor.fi) != m:
        raise ValueError("hand jacobian variable count differs from wrench size")
    dp = np.asarray(fric.f0).shape[0]
    dt = np.asarray(tor.f0).shape[0]
    dim = dp + dt

    def embed(p_block, t_block):
        out = np.zeros((dim, dim))
        out[:dp, :dp] = np.asarray(p_block)
        out[dp:, dp:] = np.asarray(t_block)
        return out

    f0 = embed(fric.f0, tor.f0)
    fi = [embed(p, t) for p, t in zip(fric.fi, tor.fi)]
    return Lmi(f0, fi, sense="geq")


def equilibrium_residual(scenario, x):
    """Norm of the unbalanced wrench G x + g0."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (scenario.wrench_dim,):
        raise ValueError(
            f"expected {scenario.wrench_dim} force components, got {x.shape[0]}"
        )
    g = grasp_map(scenario.contacts)
    return float(np.linalg.norm(g @ x + scenario.external_load))


def force_closure_certificate(contacts, forces, epsilon, tol=1e-9):
    """Check map rank, wrench balance, and strict cone membership.

    The rank condition asks the smallest eigenvalue of G G^T to clear
    ``epsilon``; balance asks ||G f|| <= tol; each force must point into
    its cone with margin strictly above tol.
    """
    if len(forces) != len(contacts):
        raise ValueError("need exactly one force per contact")
    g = grasp_map(contacts)
    gram = 0.5 * (g @ g.T + (g @ g.T).T)
    lam_min = float(sym_eigvals(gram)[-1])
    f = np.concatenate([vec3(v) for v in forces])
    residual = float(np.linalg.norm(g @ f))

    margins = []
    oks = []
    for c, fv in zip(contacts, forces):
        fv = vec3(fv)
        cone = float(fv @ c.axis - np.linalg.norm(fv) / np.sqrt(c.mu**2 + 1.0))
        margins.append(cone)
        oks.append(cone > tol)
    return ForceClosureReport(
        lambda_min=lam_min,
        grasp_map_ok=lam_min >= float(epsilon),
        equilibrium_residual=residual,
        equilibrium_ok=residual <= tol,
        cone_margins=tuple(margins),
        cone_ok=tuple(oks),
    )


def scenario_to_lp(scenario, objective="sum_of_variables"):
    """Assemble the linear part of a scenario as a minimization LP.

    Extra rows and torque bounds become A x - b <= 0 rows; the cone
    blocks stay nonlinear and are checked on solutions separately via
    ``friction_lmi``.  The variable count comes from the extra rows when
    present, otherwise from the wrench dimension.
    """
    rows = []
    rhs = []
    n = None
    if scenario.extra_linear_rows:
        n = len(scenario.extra_linear_rows[0][0])
    elif scenario.hand_jacobian is not None:
        n = scenario.hand_jacobian.shape[0]
    if n is None or n == 0:
        raise ValueError("scenario has no linear constraints to extract")

    for coeffs, b, sense in scenario.extra_linear_rows:
        if sense == "geq":
            rows.append(-coeffs)
            rhs.append(-b)
        else:
            rows.append(coeffs)
            rhs.append(b)

    if scenario.hand_jacobian is not None:
        jt = scenario.hand_jacobian.T
        if jt.shape[1] != n:
            raise ValueError("torque rows disagree with extra rows on variable count")
        upper = scenario.tau_upper - scenario.tau_ext
        lower = scenario.tau_ext - scenario.tau_lower
        for j in range(jt.shape[0]):
            rows.append(jt[j])
            rhs.append(upper[j])
            rows.append(-jt[j])
            rhs.append(lower[j])

    if isinstance(objective, str):
        if objective != "sum_of_variables":
            raise ValueError(f"unknown objective {objective!r}")
        cost = np.ones(n)
    else:
        cost = np.asarray(objective, dtype=float).reshape(-1)
        if cost.shape != (n,):
            raise ValueError(f"objective must have {n} components")
    return LpProblem(cost, np.array(rows), np.array(rhs))


def cone_feasible(contacts, x, tol=0.0):
    """True when the stacked wrench x satisfies every contact's cone."""
    lmi = friction_lmi(contacts)
    return lmi_feasible(lmi, np.asarray(x, dtype=float).reshape(-1), tol=tol)
