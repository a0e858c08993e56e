import numpy as np
import pytest

from gfo.grasp import (
    Contact,
    GraspScenario,
    combined_lmi,
    equilibrium_residual,
    force_closure_certificate,
    friction_lmi,
    grasp_map,
    scenario_to_lp,
    torque_lmi,
    weighted_norm_pcwf,
)
from gfo.inequalities import is_psd, lmi_eval, lmi_feasible
from gfo.linalg import skew

EQ38_COEFFS = (1.7744, 1.8984, 1.5, 2.1994, 1.858, 1.5, 1.8642, 1.7924, 1.5)
EQ38_TORQUES = (
    36.601, -40.756, -38.333, -37.788, -35.586, -35.823, -39.289, -40.043, -34.805,
)


def equatorial_contacts(mu=0.8, count=3):
    angles = [2.0 * np.pi * i / count for i in range(count)]
    return [
        Contact((np.cos(t), np.sin(t), 0.0), (-np.cos(t), -np.sin(t), 0.0), mu)
        for t in angles
    ]


def test_contact_validation():
    with pytest.raises(ValueError):
        Contact((0, 0, 0), (0, 0, 2.0), 0.5)
    with pytest.raises(ValueError):
        Contact((0, 0, 0), (0, 0, 1), -0.1)
    c = Contact((1, 2, 3), (1, 0, 0), 0.0)
    assert c.mu == 0.0


def test_grasp_map_single_origin_contact():
    g = grasp_map([Contact((0, 0, 0), (0, 0, 1), 0.5)])
    assert g.shape == (6, 3)
    assert np.array_equal(g[:3], np.eye(3))
    assert np.array_equal(g[3:], np.zeros((3, 3)))


def test_grasp_map_antipodal_pair_blocks():
    pair = [Contact((1, 0, 0), (-1, 0, 0), 0.5), Contact((-1, 0, 0), (1, 0, 0), 0.5)]
    g = grasp_map(pair)
    assert g.shape == (6, 6)
    assert np.array_equal(g[3:, :3], skew((1, 0, 0)))
    assert np.array_equal(g[3:, 3:], skew((-1, 0, 0)))


def test_grasp_map_shape_and_translation():
    rng = np.random.default_rng(11)
    for k in (1, 2, 5):
        positions = rng.normal(size=(k, 3))
        contacts = [Contact(p, (0, 0, 1), 0.4) for p in positions]
        g = grasp_map(contacts)
        assert g.shape == (6, 3 * k)
        d = rng.normal(size=3)
        shifted = [Contact(p + d, (0, 0, 1), 0.4) for p in positions]
        gd = grasp_map(shifted)
        assert np.allclose(gd[:3], g[:3])
        f = rng.normal(size=3 * k)
        force_sum = f.reshape(k, 3).sum(axis=0)
        extra = gd[3:] @ f - g[3:] @ f
        assert np.allclose(extra, skew(d) @ force_sum)


def test_grasp_map_needs_contacts():
    with pytest.raises(ValueError):
        grasp_map([])


def test_weighted_norm_values():
    assert weighted_norm_pcwf((3, 4, 9), 2.0) == pytest.approx(2.5, abs=1e-15)
    assert weighted_norm_pcwf((0, 0, 7.2), 1.3) == 0.0


def test_weighted_norm_homogeneous_in_tangentials():
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = rng.normal(size=3)
        s = float(rng.uniform(0.1, 5.0))
        scaled = np.array([s * x[0], s * x[1], x[2]])
        assert weighted_norm_pcwf(scaled, 0.7) == pytest.approx(
            s * weighted_norm_pcwf(x, 0.7), rel=1e-12
        )


def test_weighted_norm_rejects_frictionless():
    with pytest.raises(ValueError):
        weighted_norm_pcwf((1, 1, 1), 0.0)


def test_friction_lmi_normal_force_block():
    lmi = friction_lmi([Contact((0, 0, 0), (0, 0, 1), 0.5)])
    p = np.asarray(lmi_eval(lmi, [0, 0, 1]))
    assert np.allclose(p, 0.5 * np.eye(3))
    assert is_psd(p)


def test_friction_lmi_violating_wrench():
    lmi = friction_lmi([Contact((0, 0, 0), (0, 0, 1), 0.5)])
    p = np.asarray(lmi_eval(lmi, [1, 0, 1]))
    assert np.allclose(p, [[0.5, 0, 1], [0, 0.5, 0], [1, 0, 0.5]])
    assert not is_psd(p)


def test_friction_lmi_zero_is_boundary():
    lmi = friction_lmi([Contact((0, 0, 0), (0, 0, 1), 0.5)])
    assert np.allclose(np.asarray(lmi_eval(lmi, np.zeros(3))), 0.0)
    assert lmi_feasible(lmi, np.zeros(3))


def test_friction_lmi_matches_cone_membership():
    # psd of the block is the same predicate as the cone inequalities
    mu = 0.6
    lmi = friction_lmi([Contact((0, 0, 0), (0, 0, 1), mu)])
    rng = np.random.default_rng(19)
    seen_inside = seen_outside = 0
    for _ in range(200):
        x = rng.normal(size=3) * np.array([1.0, 1.0, 2.0])
        in_cone = x[2] >= 0 and weighted_norm_pcwf(x, mu) <= x[2]
        if abs(weighted_norm_pcwf(x, mu) - max(x[2], 0.0)) < 1e-9:
            continue
        assert is_psd(np.asarray(lmi_eval(lmi, x))) == in_cone
        seen_inside += in_cone
        seen_outside += not in_cone
    assert seen_inside > 10 and seen_outside > 10


def unit_hand_scenario():
    return GraspScenario(
        contacts=[Contact((0, 0, 0), (0, 0, 1), 0.5)],
        hand_jacobian=np.eye(3),
        tau_lower=[-1, -1, -1],
        tau_upper=[1, 1, 1],
        tau_ext=[0, 0, 0],
    )


def test_torque_lmi_interior_point():
    diag = np.diag(np.asarray(lmi_eval(torque_lmi(unit_hand_scenario()), [0.5, 0, 0])))
    assert sorted(set(np.round(diag, 12))) == [0.5, 1.0, 1.5]
    assert lmi_feasible(torque_lmi(unit_hand_scenario()), [0.5, 0, 0])


def test_torque_lmi_bound_violation():
    diag = np.diag(np.asarray(lmi_eval(torque_lmi(unit_hand_scenario()), [2, 0, 0])))
    assert diag.min() == pytest.approx(-1.0)
    assert not lmi_feasible(torque_lmi(unit_hand_scenario()), [2, 0, 0])


def test_torque_lmi_pinched_bounds():
    sc = GraspScenario(
        contacts=[Contact((0, 0, 0), (0, 0, 1), 0.5)],
        hand_jacobian=np.eye(3),
        tau_lower=[0, 0, 0],
        tau_upper=[0, 0, 0],
        tau_ext=[0, 0, 0],
    )
    lmi = torque_lmi(sc)
    assert lmi_feasible(lmi, np.zeros(3))
    rng = np.random.default_rng(5)
    for _ in range(10):
        x = rng.normal(size=3)
        assert not lmi_feasible(lmi, x)


def test_combined_lmi_dimension():
    sc = GraspScenario(
        contacts=equatorial_contacts(),
        hand_jacobian=np.eye(9),
        tau_lower=-np.ones(9),
        tau_upper=np.ones(9),
        tau_ext=np.zeros(9),
    )
    assert np.asarray(combined_lmi(sc).f0).shape == (27, 27)


def test_combined_lmi_zero_feasible_with_straddling_bounds():
    sc = unit_hand_scenario()
    assert lmi_feasible(combined_lmi(sc), np.zeros(3))


def test_combined_lmi_is_conjunction_of_blocks():
    contacts = equatorial_contacts()
    sc = GraspScenario(
        contacts=contacts,
        hand_jacobian=np.eye(9),
        tau_lower=-np.ones(9),
        tau_upper=np.ones(9),
        tau_ext=np.zeros(9),
    )
    whole = combined_lmi(sc)
    fric = friction_lmi(contacts)
    tor = torque_lmi(sc)
    rng = np.random.default_rng(7)
    for _ in range(25):
        x = rng.normal(size=9)
        expect = lmi_feasible(fric, x) and lmi_feasible(tor, x)
        assert lmi_feasible(whole, x) == expect


def test_equilibrium_zero_cases():
    sc = GraspScenario(contacts=[Contact((0, 0, 0), (0, 0, 1), 0.5)])
    assert equilibrium_residual(sc, [0, 0, 0]) == 0.0


def test_equilibrium_antipodal_squeeze_balances():
    pair = [Contact((1, 0, 0), (-1, 0, 0), 0.5), Contact((-1, 0, 0), (1, 0, 0), 0.5)]
    sc = GraspScenario(contacts=pair)
    assert equilibrium_residual(sc, [-1, 0, 0, 1, 0, 0]) < 1e-15


def test_equilibrium_unresisted_gravity():
    mass = 2.0
    sc = GraspScenario(
        contacts=[Contact((0, 0, 0), (0, 0, 1), 0.5)],
        external_load=[0, 0, -9.81 * mass, 0, 0, 0],
    )
    assert equilibrium_residual(sc, [0, 0, 0]) == pytest.approx(9.81 * mass)


def test_equilibrium_dimension_mismatch():
    sc = GraspScenario(contacts=[Contact((0, 0, 0), (0, 0, 1), 0.5)])
    with pytest.raises(ValueError):
        equilibrium_residual(sc, [0, 0, 0, 0])


def test_certificate_antipodal_pair_lacks_map_rank():
    pair = [Contact((1, 0, 0), (-1, 0, 0), 0.5), Contact((-1, 0, 0), (1, 0, 0), 0.5)]
    rep = force_closure_certificate(pair, [(-1, 0, 0), (1, 0, 0)], epsilon=0.1)
    assert rep.equilibrium_ok
    assert all(rep.cone_ok)
    assert abs(rep.lambda_min) < 1e-12
    assert not rep.grasp_map_ok
    assert not rep.passed


def test_certificate_three_equatorial_contacts_pass():
    contacts = equatorial_contacts(mu=0.8)
    forces = [tuple(c.axis) for c in contacts]
    rep = force_closure_certificate(contacts, forces, epsilon=0.1)
    assert rep.passed
    assert rep.lambda_min > 0.1
    assert rep.equilibrium_residual < 1e-12
    assert min(rep.cone_margins) > 0.2


def test_certificate_orthogonal_force_fails_cone():
    c = Contact((0, 0, 0), (0, 0, 1), 0.5)
    rep = force_closure_certificate([c], [(1, 0, 0)], epsilon=1e-3)
    assert not rep.cone_ok[0]
    assert rep.cone_margins[0] == pytest.approx(-1.0 / np.sqrt(0.25 + 1.0))


def test_certificate_force_count_mismatch():
    c = Contact((0, 0, 0), (0, 0, 1), 0.5)
    with pytest.raises(ValueError):
        force_closure_certificate([c], [], epsilon=0.1)


def test_certificate_scaling_keeps_signs():
    contacts = equatorial_contacts(mu=0.8)
    forces = [tuple(c.axis) for c in contacts]
    base = force_closure_certificate(contacts, forces, epsilon=0.1)
    for s in (0.5, 10.0, 1e3):
        scaled = [tuple(s * c.axis) for c in contacts]
        rep = force_closure_certificate(contacts, scaled, epsilon=0.1)
        assert rep.equilibrium_ok
        assert rep.cone_ok == base.cone_ok
        for m_scaled, m_base in zip(rep.cone_margins, base.cone_margins):
            assert m_scaled == pytest.approx(s * m_base, rel=1e-9)


def test_scenario_to_lp_single_published_row():
    sc = GraspScenario(extra_linear_rows=[(EQ38_COEFFS, -600.0, "geq")])
    lp = scenario_to_lp(sc)
    assert np.array_equal(lp.cost, np.ones(9))
    assert lp.A.shape == (1, 9)
    assert np.array_equal(lp.A[0], -np.asarray(EQ38_COEFFS))
    assert lp.b[0] == 600.0


def test_scenario_to_lp_published_solution_is_feasible():
    sc = GraspScenario(extra_linear_rows=[(EQ38_COEFFS, -600.0, "geq")])
    lp = scenario_to_lp(sc)
    slack = lp.b[0] - lp.A[0] @ np.asarray(EQ38_TORQUES)
    assert 129.8 <= slack <= 130.0


def test_scenario_to_lp_torque_rows():
    lp = scenario_to_lp(unit_hand_scenario(), objective=[1.0, 2.0, 3.0])
    assert lp.A.shape == (6, 3)
    assert np.array_equal(lp.cost, [1.0, 2.0, 3.0])
    # every row must hold at an interior torque point
    x = np.array([0.25, -0.25, 0.0])
    assert np.all(lp.A @ x - lp.b <= 0)
    x_bad = np.array([1.5, 0.0, 0.0])
    assert np.any(lp.A @ x_bad - lp.b > 0)


def test_scenario_to_lp_rejects_empty():
    with pytest.raises(ValueError):
        scenario_to_lp(GraspScenario(contacts=[Contact((0, 0, 0), (0, 0, 1), 0.5)]))


def test_scenario_to_lp_rejects_unknown_objective():
    sc = GraspScenario(extra_linear_rows=[(EQ38_COEFFS, -600.0, "geq")])
    with pytest.raises(ValueError):
        scenario_to_lp(sc, objective="largest")


def test_scenario_validation_errors():
    with pytest.raises(ValueError):
        GraspScenario(
            contacts=[Contact((0, 0, 0), (0, 0, 1), 0.5)],
            hand_jacobian=np.eye(3),
            tau_lower=[1, 1, 1],
            tau_upper=[-1, -1, -1],
            tau_ext=[0, 0, 0],
        )
    with pytest.raises(ValueError):
        GraspScenario(
            contacts=[Contact((0, 0, 0), (0, 0, 1), 0.5)],
            hand_jacobian=np.eye(3),
            tau_lower=[-1, -1, -1],
            tau_upper=[1, 1, 1],
        )
    with pytest.raises(ValueError):
        GraspScenario(contacts=[], tau_lower=[-1])
    with pytest.raises(ValueError):
        GraspScenario(external_load=[0, 0, 0])
    with pytest.raises(ValueError):
        GraspScenario(extra_linear_rows=[((1.0, 2.0), 0.0, "between")])
    with pytest.raises(ValueError):
        GraspScenario(
            extra_linear_rows=[((1.0, 2.0), 0.0, "geq"), ((1.0,), 0.0, "leq")]
        )


def test_scenario_epsilon_default_and_validation():
    sc = GraspScenario(contacts=[Contact((0, 0, 0), (0, 0, 1), 0.5)])
    assert sc.epsilon == 1e-3
    with pytest.raises(ValueError):
        GraspScenario(epsilon=0.0)
