import os
import subprocess
import sys

import numpy as np
import pytest

from gfo import _backend, _py_kernels

compiled = pytest.importorskip("gfo._kernels")


def random_sym(rng, n):
    m = rng.standard_normal((n, n))
    return (m + m.T) / 2.0


class TestKernelAgreement:
    def test_eigvals_match(self):
        rng = np.random.default_rng(4)
        for n in (1, 2, 3, 7, 20, 40):
            m = random_sym(rng, n)
            dp, okp = _py_kernels.jacobi_eigvals(m)
            dc, okc = compiled.jacobi_eigvals(m)
            assert okp and okc
            assert np.allclose(np.sort(dp), np.sort(dc), rtol=0, atol=1e-12)

    def test_facet_scan_matches_on_cross_polytope(self):
        pts = np.vstack([np.eye(6), -np.eye(6)])
        dp, cp = _py_kernels.facet_scan(pts, 1e-9)
        dc, cc = compiled.facet_scan(pts, 1e-9)
        assert cp == cc == 64
        assert abs(dp - dc) <= 1e-12

    def test_facet_scan_matches_on_random_clouds(self):
        rng = np.random.default_rng(9)
        for _ in range(3):
            pts = rng.standard_normal((14, 6))
            pts = np.vstack([pts, -pts])       # symmetric, origin inside
            dp, cp = _py_kernels.facet_scan(pts, 1e-9)
            dc, cc = compiled.facet_scan(pts, 1e-9)
            assert cp == cc
            assert abs(dp - dc) <= 1e-9 * max(1.0, dp)

    def test_collocation_loss_and_grad_match(self):
        from gfo.kkt import LpProblem
        from gfo.neural import Mlp

        lp = LpProblem(
            [-9.54, -8.16, -4.26, -11.43], [[3.18, 2.72, 1.42, 3.81]], [7.81]
        )
        sizes = (1, 30, 5)
        t = np.linspace(0.0, 10.0, 201)
        y0 = np.zeros(5)
        for seed in range(3):
            mlp = Mlp.init(sizes, seed=seed)
            lp_args = (t, lp.cost, lp.A, lp.b, y0)
            lposs, gp = _py_kernels.collocation_pass(
                mlp.theta, sizes, *lp_args, True
            )
            lc, gc = compiled.collocation_pass(mlp.theta, sizes, *lp_args, True)
            assert abs(lposs - lc) <= 1e-12 * max(1.0, lposs)
            scale = max(1e-30, float(np.max(np.abs(gp))))
            assert np.max(np.abs(gp - gc)) <= 1e-11 * scale

    def test_collocation_want_grad_false(self):
        from gfo.kkt import LpProblem
        from gfo.neural import Mlp

        lp = LpProblem([1.0], [[-1.0]], [-1.0])
        mlp = Mlp.init((1, 8, 2), seed=0)
        t = np.linspace(0.0, 1.0, 11)
        loss, grad = compiled.collocation_pass(
            mlp.theta, (1, 8, 2), t, lp.cost, lp.A, lp.b, np.zeros(2), False
        )
        assert grad is None and loss > 0.0


class TestBackendSelection:
    def run_probe(self, env_value):
        env = dict(os.environ)
        if env_value is None:
            env.pop("GFO_BACKEND", None)
        else:
            env["GFO_BACKEND"] = env_value
        proc = subprocess.run(
            [sys.executable, "-c", "from gfo._backend import BACKEND; print(BACKEND)"],
            capture_output=True, text=True, env=env,
        )
        return proc

    def test_default_prefers_compiled(self):
        proc = self.run_probe(None)
        assert proc.returncode == 0
        assert proc.stdout.strip() == "c"

    def test_python_override(self):
        proc = self.run_probe("python")
        assert proc.returncode == 0
        assert proc.stdout.strip() == "python"

    def test_unknown_override_fails(self):
        proc = self.run_probe("fortran")
        assert proc.returncode != 0

    def test_current_process_exports(self):
        assert _backend.BACKEND in ("c", "python")
        assert callable(_backend.jacobi_eigvals)
        assert callable(_backend.facet_scan)
        assert callable(_backend.collocation_pass)

    def test_training_agrees_across_backends(self):
        # same seed, same defaults, short budget: endpoints must agree to
        # rounding-accumulation level even though kernels differ
        script = (
            "import numpy as np\n"
            "from gfo.kkt import LpProblem\n"
            "from gfo.neural import TrainConfig, solve_lp_nn\n"
            "lp = LpProblem([-9.54, -8.16, -4.26, -11.43],"
            " [[3.18, 2.72, 1.42, 3.81]], [7.81])\n"
            "sol = solve_lp_nn(lp, config=TrainConfig(epochs=60))\n"
            "print(repr(sol.x.tolist()))\n"
        )
        outs = {}
        for backend in ("c", "python"):
            env = dict(os.environ)
            env["GFO_BACKEND"] = backend
            proc = subprocess.run(
                [sys.executable, "-c", script],
                capture_output=True, text=True, env=env,
            )
            assert proc.returncode == 0, proc.stderr
            outs[backend] = np.asarray(eval(proc.stdout))
        assert np.allclose(outs["c"], outs["python"], rtol=1e-6, atol=1e-9)
