"""Command-line harness: problem ingestion, solve/quality runs, result emission.

Problems and scenarios live in single JSON documents whose keys mirror the
dataclass fields.  Every run writes a report JSON plus CSV files (loss history,
trajectory) suitable for external plotting; nothing is rendered here.

Exit codes: 0 all requested feasibility checks pass, 1 infeasible result,
2 input error, 3 numeric failure.
"""

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .grasp import Contact, GraspScenario, force_closure_certificate, scenario_to_lp
from .inequalities import Bmi, bmi_to_sdp, lmi_eval, rank_one_recover
from .kkt import KktState, LpProblem, integrate, kkt_residual
from .linalg import ConvergenceError, is_psd
from .neural import TrainConfig, TrainingDivergence, ansatz, solve_lp_nn
from .quality import grasp_wrench_set, q_lrw_exact, q_lrw_sampled

# solutions approach the active face asymptotically, so row checks allow
# solver-accuracy slack; exact violations are still reported as numbers
FEAS_TOL = 1e-3
EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3


class InputError(Exception):
    """Bad file, bad schema, or bad dimensions in user-supplied data."""


@dataclass
class RunReport:
    """Everything a solve run produced, with feasibility re-derived from the
    solution vector rather than trusted from the solver."""

    problem_id: str
    solver: str
    solution: dict
    objective: float
    residuals: dict
    feasibility: dict
    q_lrw: float | None = None
    wall_seconds: float = 0.0
    outputs: dict = field(default_factory=dict)

    def passed(self):
        checks = [v for v in self.feasibility.values() if v is not None]
        return bool(checks) and all(checks)

    def to_json(self):
        return {
            "problem_id": self.problem_id,
            "solver": self.solver,
            "solution": self.solution,
            "objective": self.objective,
            "residuals": self.residuals,
            "feasibility": self.feasibility,
            "q_lrw": self.q_lrw,
            "wall_seconds": self.wall_seconds,
            "outputs": self.outputs,
        }


def _data_dir():
    return resources.files("gfo") / "data"


def _resolve(path):
    """Literal path first, then the bundled fixture directory."""
    if os.path.exists(path):
        return path
    bundled = _data_dir() / os.path.basename(path)
    if bundled.is_file():
        return str(bundled)
    raise InputError(f"{path}: no such file (and no bundled fixture by that name)")


def _read_json(path):
    resolved = _resolve(path)
    with open(resolved, encoding="utf-8") as f:
        text = f.read()
    if not text.strip():
        raise InputError(f"{path}: empty file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: parse error at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top-level value must be an object")
    return doc


def _matrix(doc, path, key, width=None):
    rows = doc.get(key)
    if not isinstance(rows, list) or not rows:
        raise InputError(f"{path}: {key}: expected a nonempty list of rows")
    lengths = set()
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise InputError(f"{path}: {key}[{i}]: expected a row array")
        lengths.add(len(row))
    if len(lengths) != 1:
        raise InputError(f"{path}: {key}: ragged rows (lengths {sorted(lengths)})")
    n = lengths.pop()
    if width is not None and n != width:
        raise InputError(f"{path}: {key}: rows have {n} entries, expected {width}")
    return np.asarray(rows, dtype=float)


def _vector(doc, path, key, length=None):
    vals = doc.get(key)
    if not isinstance(vals, list):
        raise InputError(f"{path}: {key}: expected a list of numbers")
    if length is not None and len(vals) != length:
        raise InputError(f"{path}: {key}: has {len(vals)} entries, expected {length}")
    return np.asarray(vals, dtype=float)


def load_lp(path):
    """Read an LP from JSON.  Scenario documents are accepted too and pass
    through the scenario-to-LP conversion."""
    doc = _read_json(path)
    if "cost" in doc:
        cost = _vector(doc, path, "cost")
        a = _matrix(doc, path, "A", width=cost.shape[0])
        b = _vector(doc, path, "b", length=a.shape[0])
        try:
            return LpProblem(cost, a, b)
        except ValueError as exc:
            raise InputError(f"{path}: {exc}") from exc
    if "contacts" in doc or "extra_linear_rows" in doc:
        return scenario_to_lp(load_scenario(path))
    raise InputError(f"{path}: neither an LP (cost/A/b) nor a grasp scenario")


def load_scenario(path):
    """Read a GraspScenario from JSON, reporting violations by field path."""
    doc = _read_json(path)
    contacts = []
    raw_contacts = doc.get("contacts", [])
    if not isinstance(raw_contacts, list):
        raise InputError(f"{path}: contacts: expected a list")
    for i, entry in enumerate(raw_contacts):
        if not isinstance(entry, dict):
            raise InputError(f"{path}: contacts[{i}]: expected an object")
        for key in ("position", "axis", "mu"):
            if key not in entry:
                raise InputError(f"{path}: contacts[{i}].{key}: missing")
        try:
            contacts.append(Contact(entry["position"], entry["axis"], entry["mu"]))
        except (ValueError, TypeError) as exc:
            raise InputError(f"{path}: contacts[{i}]: {exc}") from exc

    kwargs = {"contacts": contacts}
    if "hand_jacobian" in doc:
        kwargs["hand_jacobian"] = _matrix(doc, path, "hand_jacobian")
    for key in ("tau_lower", "tau_upper", "tau_ext", "external_load"):
        if key in doc:
            kwargs[key] = _vector(doc, path, key)
    if "epsilon" in doc:
        kwargs["epsilon"] = float(doc["epsilon"])
    rows = []
    for i, row in enumerate(doc.get("extra_linear_rows", [])):
        if not (isinstance(row, list) and len(row) == 3):
            raise InputError(
                f"{path}: extra_linear_rows[{i}]: expected [coeffs, rhs, sense]"
            )
        rows.append((np.asarray(row[0], dtype=float), float(row[1]), row[2]))
    if rows:
        kwargs["extra_linear_rows"] = rows
    try:
        return GraspScenario(**kwargs)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def save_lp(lp, path):
    doc = {
        "cost": lp.cost.tolist(),
        "A": lp.A.tolist(),
        "b": lp.b.tolist(),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def save_scenario(scenario, path):
    doc = {
        "contacts": [
            {"position": c.position.tolist(), "axis": c.axis.tolist(), "mu": c.mu}
            for c in scenario.contacts
        ],
        "epsilon": scenario.epsilon,
    }
    if scenario.hand_jacobian is not None:
        doc["hand_jacobian"] = scenario.hand_jacobian.tolist()
    for key in ("tau_lower", "tau_upper", "tau_ext"):
        val = getattr(scenario, key)
        if val is not None:
            doc[key] = val.tolist()
    doc["external_load"] = scenario.external_load.tolist()
    if scenario.extra_linear_rows:
        doc["extra_linear_rows"] = [
            [np.asarray(c).tolist(), float(r), s]
            for c, r, s in scenario.extra_linear_rows
        ]
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def _fmt(value):
    # shortest round-trip repr keeps identical runs byte-identical
    return repr(float(value))


def _write_loss_csv(path, values):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("epoch,loss\n")
        for i, v in enumerate(values, start=1):
            f.write(f"{i},{_fmt(v)}\n")


def _write_trajectory_csv(path, times, states):
    cols = ",".join(f"y_{j}" for j in range(1, states.shape[1] + 1))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"t,{cols}\n")
        for t, row in zip(times, states):
            f.write(_fmt(t) + "," + ",".join(_fmt(v) for v in row) + "\n")


def _write_points_csv(path, points):
    cols = ",".join(f"w_{j}" for j in range(1, points.shape[1] + 1))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(cols + "\n")
        for row in points:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _write_report(path, report):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report.to_json(), f, indent=2)
        f.write("\n")


def _problem_id(path, doc_id=None):
    if doc_id:
        return doc_id
    base = os.path.basename(str(path))
    return os.path.splitext(base)[0]


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("GFO_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise InputError(f"GFO_SEED={env!r}: not an integer") from exc
    return 0


def _train_config(args):
    return TrainConfig(
        t_end=args.t_end,
        dt=args.dt,
        epochs=args.epochs,
        learning_rate=args.lr,
        seed=_seed(args),
        hidden_sizes=(args.hidden,),
    )


def _lp_row_feasible(lp, x):
    slack = lp.b - lp.A @ x
    scale = 1.0 + float(np.max(np.abs(lp.b), initial=0.0))
    return bool(np.min(slack, initial=0.0) >= -FEAS_TOL * scale)


def _residual_dict(lp, x, u):
    res = kkt_residual(lp, x, u)
    return {
        "stationarity": res.stationarity,
        "complementarity": res.complementarity,
        "primal_violation": res.primal_violation,
        "dual_violation": res.dual_violation,
        "max": res.max(),
    }


def _solve(lp, args, outdir, problem_id, scenario=None):
    """Shared solve pipeline for solve-lp and solve-grasp."""
    os.makedirs(outdir, exist_ok=True)
    start = time.perf_counter()
    outputs = {}
    if args.solver == "nn":
        config = _train_config(args)
        solution = solve_lp_nn(lp, config=config)
        x, u = solution.x, solution.u
        loss_path = os.path.join(outdir, "loss.csv")
        _write_loss_csv(loss_path, solution.loss_history.values)
        outputs["loss_csv"] = loss_path
        times = config.grid()
        rest = KktState.zero(lp)
        states = np.array(
            [ansatz(solution.mlp, t, rest).as_vector() for t in times]
        )
        solver_name = "nn"
    else:
        traj = integrate(lp, KktState.zero(lp), t_end=args.t_end, dt=args.dt)
        times = traj.times
        states = traj.states
        end = traj.endpoint(lp)
        x, u = end.x, end.u
        solver_name = "ode-oracle"
    traj_path = os.path.join(outdir, "trajectory.csv")
    _write_trajectory_csv(traj_path, times, states)
    outputs["trajectory_csv"] = traj_path

    feasibility = {"lp_rows": _lp_row_feasible(lp, x)}
    if scenario is not None and scenario.contacts:
        from .grasp import friction_lmi

        lmi = friction_lmi(scenario.contacts)
        feasibility["cone"] = bool(is_psd(np.asarray(lmi_eval(lmi, x))))
    else:
        feasibility["cone"] = None
    if scenario is not None and scenario.tau_lower is not None:
        torques = scenario.hand_jacobian.T @ x + scenario.tau_ext
        feasibility["torque"] = bool(
            np.all(torques >= scenario.tau_lower - FEAS_TOL)
            and np.all(torques <= scenario.tau_upper + FEAS_TOL)
        )
    else:
        feasibility["torque"] = None

    report = RunReport(
        problem_id=problem_id,
        solver=solver_name,
        solution={"x": x.tolist(), "u": u.tolist()},
        objective=float(lp.objective(x)),
        residuals=_residual_dict(lp, x, u),
        feasibility=feasibility,
        wall_seconds=time.perf_counter() - start,
        outputs=outputs,
    )
    _write_report(os.path.join(outdir, "report.json"), report)
    return report


def _cmd_solve_lp(args):
    doc = _read_json(args.input)
    lp = load_lp(args.input)
    report = _solve(lp, args, args.out, _problem_id(args.input, doc.get("id")))
    print(f"objective {report.objective:.6f}  feasible {report.passed()}")
    return EXIT_OK if report.passed() else EXIT_INFEASIBLE


def _cmd_solve_grasp(args):
    doc = _read_json(args.input)
    scenario = load_scenario(args.input)
    lp = scenario_to_lp(scenario)
    report = _solve(
        lp, args, args.out, _problem_id(args.input, doc.get("id")), scenario=scenario
    )
    print(f"objective {report.objective:.6f}  feasible {report.passed()}")
    return EXIT_OK if report.passed() else EXIT_INFEASIBLE


def _cmd_quality(args):
    doc = _read_json(args.scenario)
    scenario = load_scenario(args.scenario)
    if not scenario.contacts:
        raise InputError(f"{args.scenario}: quality analysis needs contacts")
    os.makedirs(args.out, exist_ok=True)
    start = time.perf_counter()
    wset = grasp_wrench_set(scenario.contacts, m=args.edges, lam=args.lam)
    points = wset.scaled_points()
    _write_points_csv(os.path.join(args.out, "wrenches.csv"), points)
    if args.method == "exact":
        quality = q_lrw_exact(points)
    else:
        quality = q_lrw_sampled(points, n_dirs=args.dirs, seed=_seed(args))
    report = RunReport(
        problem_id=_problem_id(args.scenario, doc.get("id")),
        solver=args.method,
        solution={"wrench_count": int(points.shape[0])},
        objective=float(quality.q_lrw),
        residuals={},
        feasibility={"contains_origin": bool(quality.contains_origin)},
        q_lrw=float(quality.q_lrw),
        wall_seconds=time.perf_counter() - start,
        outputs={"wrenches_csv": os.path.join(args.out, "wrenches.csv")},
    )
    _write_report(os.path.join(args.out, "report.json"), report)
    print(
        f"q_lrw {quality.q_lrw:.6f}  contains_origin {quality.contains_origin}"
        f"  method {quality.method}"
    )
    return EXIT_OK if report.passed() else EXIT_INFEASIBLE


def _cmd_certify(args):
    doc = _read_json(args.scenario)
    scenario = load_scenario(args.scenario)
    raw_forces = doc.get("forces")
    if raw_forces is None:
        raise InputError(f"{args.scenario}: forces: missing (needed by certify)")
    if len(raw_forces) != len(scenario.contacts):
        raise InputError(
            f"{args.scenario}: forces: {len(raw_forces)} entries for "
            f"{len(scenario.contacts)} contacts"
        )
    forces = [np.asarray(f, dtype=float) for f in raw_forces]
    os.makedirs(args.out, exist_ok=True)
    start = time.perf_counter()
    cert = force_closure_certificate(scenario.contacts, forces, scenario.epsilon)
    report = RunReport(
        problem_id=_problem_id(args.scenario, doc.get("id")),
        solver="certificate",
        solution={"forces": [f.tolist() for f in forces]},
        objective=float(cert.lambda_min),
        residuals={"equilibrium": float(cert.equilibrium_residual)},
        feasibility={
            "grasp_map": bool(cert.grasp_map_ok),
            "equilibrium": bool(cert.equilibrium_ok),
            "cone": bool(cert.cone_ok),
        },
        wall_seconds=time.perf_counter() - start,
    )
    _write_report(os.path.join(args.out, "report.json"), report)
    print(
        f"lambda_min {cert.lambda_min:.6f}  force_closure {cert.passed}"
    )
    return EXIT_OK if cert.passed else EXIT_INFEASIBLE


def _cmd_lift_bmi(args):
    """Round-trip demo: random bilinear pencil, lift to an SDP in lifted
    variables, evaluate both at a rank-one point, recover the point."""
    rng = np.random.default_rng(_seed(args))
    n = 3
    dim = 4
    f0 = _sym(rng, dim)
    fi = [_sym(rng, dim) for _ in range(n)]
    fij = [[_sym(rng, dim) for _ in range(n)] for _ in range(n)]
    bmi = Bmi(f0, fi, fij)
    sdp = bmi_to_sdp(bmi)
    x = rng.standard_normal(n)
    direct = _bmi_value(bmi, x)
    via_sdp = np.asarray(lmi_eval(sdp.base, sdp.extended(x)))
    gap = float(np.max(np.abs(direct - via_sdp)))
    recovered = rank_one_recover(np.asarray(sdp.m_block_builder(x)))
    rec_err = float(np.max(np.abs(recovered - x)))
    os.makedirs(args.out, exist_ok=True)
    report = RunReport(
        problem_id=f"lift-bmi-seed{_seed(args)}",
        solver="lift",
        solution={"x": x.tolist(), "recovered": recovered.tolist()},
        objective=gap,
        residuals={"lift_gap": gap, "recovery_error": rec_err},
        feasibility={"round_trip": bool(gap <= 1e-9 and rec_err <= 1e-9)},
        wall_seconds=0.0,
    )
    _write_report(os.path.join(args.out, "report.json"), report)
    print(f"lift_gap {gap:.3e}  recovery_error {rec_err:.3e}")
    return EXIT_OK if report.passed() else EXIT_INFEASIBLE


def _sym(rng, dim):
    m = rng.standard_normal((dim, dim))
    return (m + m.T) / 2.0


def _bmi_value(bmi, x):
    total = np.asarray(bmi.f0, dtype=float).copy()
    for i, fi in enumerate(bmi.fi):
        total += x[i] * np.asarray(fi)
    for i, row in enumerate(bmi.fij):
        for j, fij in enumerate(row):
            total += x[i] * x[j] * np.asarray(fij)
    return total


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gfo", description="Grasp-force optimization toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_solver_flags(p):
        p.add_argument("--input", required=True, help="LP or scenario JSON")
        p.add_argument("--solver", choices=("nn", "ode"), default="nn")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--epochs", type=int, default=1000)
        p.add_argument("--lr", type=float, default=1e-3)
        p.add_argument("--t-end", type=float, default=10.0, dest="t_end")
        p.add_argument("--dt", type=float, default=0.01)
        p.add_argument("--hidden", type=int, default=100)
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("solve-lp", help="solve a linear program")
    add_solver_flags(p)
    p.set_defaults(handler=_cmd_solve_lp)

    p = sub.add_parser("solve-grasp", help="solve a grasp scenario as an LP")
    add_solver_flags(p)
    p.set_defaults(handler=_cmd_solve_grasp)

    p = sub.add_parser("quality", help="largest-ball grasp quality")
    p.add_argument("--scenario", required=True)
    p.add_argument("--edges", type=int, default=8)
    p.add_argument("--lambda", type=float, default=1.0, dest="lam")
    p.add_argument("--method", choices=("exact", "sampled"), default="exact")
    p.add_argument("--dirs", type=int, default=4096)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=".")
    p.set_defaults(handler=_cmd_quality)

    p = sub.add_parser("certify", help="force-closure certificate")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", default=".")
    p.set_defaults(handler=_cmd_certify)

    p = sub.add_parser("lift-bmi", help="bilinear-to-SDP lift round trip")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=".")
    p.set_defaults(handler=_cmd_lift_bmi)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, TrainingDivergence, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
