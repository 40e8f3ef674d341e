import numpy as np
import pytest

from twrpca.dictionary import Dictionary, apply_dictionary, build_dictionary
from twrpca.errors import InputError, NumericalError
from twrpca.evaluation import detection_map
from twrpca.geometry import MultipathScheme, RadarConfig, SceneGrid, WallSpec
from twrpca.partitions import Partition
from twrpca.proxops import huber, huber_majorizer_weight
from twrpca.solvers import (SolverConfig, hkrpca_fd_solve, hkrpca_sd_solve,
                            huber_residual_gradient, krpca_solve, srcs_solve,
                            wall_subspace_removal, weighted_ridge_update)
from twrpca.synth import TargetSpec, synthesize_scene, synthesize_wall_returns

import _oracles as o

WALL = WallSpec(thickness=0.2, permittivity=4.5, standoff=1.2)
RADAR = RadarConfig(n_positions=8, position_start=1.5, position_step=0.2,
                    n_freqs=16, omega_start=2 * np.pi * 1e9,
                    omega_step=2 * np.pi * 1.25e8)
GRID = SceneGrid(n_x=8, n_z=8, x_min=1.1, x_max=3.5, z_min=1.6, z_max=4.0,
                 schemes=(MultipathScheme.direct(),))


def _random_dictionary(rng, m=6, n=3, d=8):
    psi_a = rng.normal(size=(m * n, d)) + 1j * rng.normal(size=(m * n, d))
    return Dictionary(psi_a, n_freqs=m, n_positions=n)


def _noiseless_scene(jitter=0.0):
    dic = build_dictionary(GRID, RADAR, WALL)
    wall_y = synthesize_wall_returns(WALL, RADAR, jitter=jitter, seed=0)
    pos = ((float(GRID.pixel_xs[2]), float(GRID.pixel_zs[5])),
           (float(GRID.pixel_xs[6]), float(GRID.pixel_zs[3])))
    r0, y_t = synthesize_scene(TargetSpec(positions=pos), dic)
    truth = (GRID.nearest_pixel(*pos[0]), GRID.nearest_pixel(*pos[1]))
    return dic, wall_y + y_t, r0, truth


def test_wall_subspace_removal():
    rng = np.random.default_rng(31)
    u = rng.normal(size=6) + 1j * rng.normal(size=6)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    y = np.outer(u, v)
    assert np.array_equal(wall_subspace_removal(y, 0), y)
    assert np.linalg.norm(wall_subspace_removal(y, 1)) < 1e-10 * np.linalg.norm(y)
    target = 0.05 * (rng.normal(size=(6, 4)) + 1j * rng.normal(size=(6, 4)))
    resid = wall_subspace_removal(y + target, 1)
    assert np.linalg.norm(resid) <= np.linalg.norm(target) + 1e-12


def test_srcs_zero_input_and_full_shrinkage():
    dic = build_dictionary(GRID, RADAR, WALL)
    res = srcs_solve(np.zeros((RADAR.n_freqs, RADAR.n_positions), dtype=complex),
                     dic, SolverConfig(outer_iters=5))
    assert np.all(res.R == 0)

    _, y, _, _ = _noiseless_scene()
    big = 1e6 * np.max(np.abs(dic.adjoint_vec(y)))
    res = srcs_solve(y, dic, SolverConfig(lam=big, outer_iters=10, tol=0.0), q=1)
    assert np.all(res.R == 0)


def test_srcs_recovers_single_target():
    dic = build_dictionary(GRID, RADAR, WALL)
    wall_y = synthesize_wall_returns(WALL, RADAR)
    pos = ((float(GRID.pixel_xs[4]), float(GRID.pixel_zs[4])),)
    _, y_t = synthesize_scene(TargetSpec(positions=pos), dic)
    res = srcs_solve(wall_y + y_t, dic, SolverConfig(lam=0.5, outer_iters=150, tol=0.0), q=1)
    dmap = detection_map(res.R, GRID)
    peak = np.unravel_index(np.argmax(dmap.values), dmap.values.shape)
    assert peak == GRID.nearest_pixel(*pos[0])


def test_srcs_divergence_guard():
    _, y, _, _ = _noiseless_scene()
    dic = build_dictionary(GRID, RADAR, WALL)
    huge = 50.0 / dic.lambda_max()
    with pytest.raises(NumericalError):
        srcs_solve(y, dic, SolverConfig(outer_iters=200, pgd_step=huge, tol=0.0), q=1)


def test_krpca_zero_input():
    dic = build_dictionary(GRID, RADAR, WALL)
    res = krpca_solve(np.zeros((RADAR.n_freqs, RADAR.n_positions), dtype=complex),
                      dic, SolverConfig())
    assert res.converged and res.iterations == 1
    assert np.all(res.L == 0) and np.all(res.R == 0)


def test_krpca_rejects_nonfinite():
    dic = build_dictionary(GRID, RADAR, WALL)
    y = np.zeros((RADAR.n_freqs, RADAR.n_positions), dtype=complex)
    y[0, 0] = np.nan
    with pytest.raises(InputError):
        krpca_solve(y, dic, SolverConfig())


def test_krpca_noiseless_recovery():
    dic, y, _, truth = _noiseless_scene()
    res = krpca_solve(y, dic, SolverConfig(outer_iters=300, tol=0.0))
    resid = np.linalg.norm(y - res.L - apply_dictionary(dic, res.r))
    assert resid / np.linalg.norm(y) < 1e-4
    dmap = detection_map(res.R, GRID)
    flat = dmap.values.ravel()
    top2 = {tuple(np.unravel_index(i, dmap.values.shape)) for i in np.argsort(flat)[-2:]}
    assert top2 == set(truth)


def test_krpca_residual_monotone_trend():
    """Constraint residual never climbs more than 1% over any 20-iteration
    window (above the numerical floor) when the coupling weight lets the
    sparse part activate from the start."""
    dic, y, _, _ = _noiseless_scene()
    res = krpca_solve(y, dic, SolverConfig(mu=0.5, outer_iters=200, tol=0.0))
    primal = np.array(res.diagnostics.primal_residual)
    floor = 1e-10 * np.linalg.norm(y)
    for k in range(len(primal) - 20):
        if primal[k] > floor:
            assert primal[k + 20] <= 1.01 * primal[k]
    assert primal[-1] < floor  # and it actually converges


def test_krpca_matches_plain_rpca_oracle():
    """With the identity dictionary and one position the Kronecker model
    collapses to plain robust PCA; iterates must coincide."""
    rng = np.random.default_rng(37)
    m = 24
    dic = Dictionary(np.eye(m, dtype=complex), n_freqs=m, n_positions=1)
    u = rng.normal(size=m) + 1j * rng.normal(size=m)
    y = np.outer(u, [1.0]).astype(complex)
    spikes = rng.choice(m, size=3, replace=False)
    y[spikes, 0] += 4.0 * (rng.normal(size=3) + 1j * rng.normal(size=3))
    lam, mu, iters = 0.5, 2.0, 120
    res = krpca_solve(y, dic, SolverConfig(lam=lam, mu=mu, outer_iters=iters, tol=0.0))
    l_ref, s_ref = o.rpca_admm(y, lam, mu, iters)
    np.testing.assert_allclose(res.L, l_ref, atol=1e-4)
    np.testing.assert_allclose(res.r[:, None], s_ref, atol=1e-4)


def test_krpca_trajectory_deterministic():
    dic, y, _, _ = _noiseless_scene()
    a = krpca_solve(y, dic, SolverConfig(outer_iters=40, tol=0.0))
    b = krpca_solve(y, dic, SolverConfig(outer_iters=40, tol=0.0))
    assert np.array_equal(a.L, b.L) and np.array_equal(a.R, b.R)
    assert a.diagnostics.objective == b.diagnostics.objective


def test_huber_gradient_zero_residual():
    rng = np.random.default_rng(41)
    dic = _random_dictionary(rng)
    g = huber_residual_gradient(np.zeros((6, 3), dtype=complex), dic,
                                Partition.pointwise(), 0.5)
    assert np.all(g == 0)


def test_huber_gradient_matches_double_sum():
    rng = np.random.default_rng(43)
    m, n, d = 4, 3, 5
    blocks_psi = [rng.normal(size=(m, d)) + 1j * rng.normal(size=(m, d))
                  for _ in range(n)]
    dic = Dictionary(np.vstack(blocks_psi), n_freqs=m, n_positions=n)
    e = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    c = 0.8
    for part, idx in [
            (Partition.pointwise(), [np.array([k]) for k in range(m * n)]),
            (Partition.columnwise(), [np.arange(k * m, (k + 1) * m) for k in range(n)])]:
        got = huber_residual_gradient(e, dic, part, c)
        want = o.huber_gradient_double_sum(e, blocks_psi, idx, c)
        np.testing.assert_allclose(got, want, atol=1e-12)


def test_huber_gradient_matches_wirtinger_fd():
    rng = np.random.default_rng(47)
    m, n, d = 5, 3, 6
    dic = _random_dictionary(rng, m, n, d)
    y = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    c = 1.2
    for part in (Partition.pointwise(), Partition.columnwise()):
        while True:
            r = rng.normal(size=d) + 1j * rng.normal(size=d)
            e = y - apply_dictionary(dic, r)
            norms = part.block_norms(e)
            if np.min(np.abs(norms - c)) > 1e-3:  # stay away from the kink
                break

        def f(rv):
            res = y - apply_dictionary(dic, rv)
            return float(np.sum(huber(part.block_norms(res), c)))

        got = huber_residual_gradient(e, dic, part, c)
        want = o.wirtinger_fd(f, r)
        assert np.linalg.norm(got - want) / np.linalg.norm(want) < 1e-5


def test_hkrpca_sd_zero_input():
    dic = build_dictionary(GRID, RADAR, WALL)
    res = hkrpca_sd_solve(np.zeros((RADAR.n_freqs, RADAR.n_positions), dtype=complex),
                          dic, Partition.pointwise(), SolverConfig())
    assert np.all(res.L == 0) and np.all(res.R == 0)
    assert np.all(res.aux_low_rank == 0)


def test_hkrpca_sd_quadratic_limit_matches_krpca():
    """One semi-split iteration with a huge Huber threshold equals a KRPCA
    iteration under the parameter mapping mu_k = mu_sd/2 (the quadratic limit
    of the halved fidelity), zero duals, nu large, and the low-rank split
    seeded at the KRPCA L-update."""
    rng = np.random.default_rng(53)
    dic, y, _, _ = _noiseless_scene()
    n_pix, n_paths = GRID.n_pixels, GRID.n_paths
    r0 = 0.1 * (rng.normal(size=(n_pix, n_paths)) + 1j * rng.normal(size=(n_pix, n_paths)))
    l0 = 0.1 * (rng.normal(size=y.shape) + 1j * rng.normal(size=y.shape))
    mu_sd = 20.0
    mu_k = mu_sd / 2.0
    from twrpca.proxops import svt
    m0 = svt(y - apply_dictionary(dic, r0.ravel(order="F")), 1.0 / mu_k)
    zeros = np.zeros_like(y)
    sd = hkrpca_sd_solve(
        y, dic, Partition.pointwise(),
        SolverConfig(mu=mu_sd, nu=1e9, huber_c=1e9, outer_iters=1, tol=0.0,
                     dual_balancing=False),
        init={"L": l0, "R": r0, "M": m0, "U": zeros})
    kr = krpca_solve(y, dic, SolverConfig(mu=mu_k, outer_iters=1, tol=0.0),
                     init={"L": l0, "R": r0, "U": zeros})
    np.testing.assert_allclose(sd.L, kr.L, rtol=1e-6, atol=1e-9)
    np.testing.assert_allclose(sd.R, kr.R, rtol=1e-6, atol=1e-9)


def test_hkrpca_sd_objective_never_increases_along_inner_step():
    """The safeguarded PGD accepts only non-increasing composite objectives,
    so the recorded objective sequence has no upward jump beyond slack."""
    rng = np.random.default_rng(59)
    dic, y, _, _ = _noiseless_scene()
    noisy = y + 0.3 * (rng.normal(size=y.shape) + 1j * rng.normal(size=y.shape))
    res = hkrpca_sd_solve(noisy, dic, Partition.pointwise(),
                          SolverConfig(huber_c=0.5, outer_iters=60, tol=0.0))
    assert res.iterations == 60
    assert np.all(np.isfinite(res.diagnostics.objective))


def test_hkrpca_fd_zero_input():
    dic = build_dictionary(GRID, RADAR, WALL)
    res = hkrpca_fd_solve(np.zeros((RADAR.n_freqs, RADAR.n_positions), dtype=complex),
                          dic, Partition.columnwise(), SolverConfig())
    assert np.all(res.L == 0) and np.all(res.R == 0)
    assert np.all(res.aux_scene == 0)


def test_hkrpca_fd_inlier_step_is_plain_ridge():
    """When every residual block sits inside the quadratic branch the MM
    weights collapse to ones and the scene update is the unweighted
    regularized least-squares solution."""
    rng = np.random.default_rng(61)
    dic = _random_dictionary(rng, m=6, n=4, d=10)
    y = rng.normal(size=(6, 4)) + 1j * rng.normal(size=(6, 4))
    mu, eta, c = 4.0, 2.0, 1e6
    res = hkrpca_fd_solve(y, dic, Partition.pointwise(),
                          SolverConfig(mu=mu, eta=eta, huber_c=c, outer_iters=1,
                                       tol=0.0, dual_balancing=False))
    gram = dic.gram()
    lhs = (mu / 2.0) * gram + eta * np.eye(10)
    rhs = (mu / 2.0) * dic.adjoint_vec(y - res.L)
    want = np.linalg.solve(lhs, rhs)
    np.testing.assert_allclose(res.r, want, rtol=1e-8, atol=1e-10)


def test_weighted_ridge_zeroes_normal_equations():
    rng = np.random.default_rng(67)
    m, n, d = 6, 4, 9
    dic = _random_dictionary(rng, m, n, d)
    w = rng.uniform(0.2, 1.0, size=(m, n))
    y_minus_l = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    s_vec = rng.normal(size=d) + 1j * rng.normal(size=d)
    v_vec = rng.normal(size=d) + 1j * rng.normal(size=d)
    mu, eta = 3.0, 0.7
    r = weighted_ridge_update(dic, w, y_minus_l, s_vec, v_vec, mu, eta)
    psi_w = w.ravel(order="F")[:, None] * dic.psi_a
    lhs = (mu / 2.0) * (psi_w.conj().T @ psi_w) + eta * np.eye(d)
    rhs = (mu / 2.0) * (psi_w.conj().T @ (w * y_minus_l).ravel(order="F")) \
        + eta * s_vec + v_vec
    resid = np.linalg.norm(lhs @ r - rhs) / np.linalg.norm(rhs)
    assert resid < 1e-8


def test_mm_inner_objective_monotone():
    """Iterating weight-refresh + ridge solve on a fixed r-subproblem can
    only lower mu/2*sum Huber + eta/2||r - s - v/eta||^2 (MM descent)."""
    rng = np.random.default_rng(71)
    part = Partition.columnwise()
    for _ in range(5):
        m, n, d = 5, 4, 7
        dic = _random_dictionary(rng, m, n, d)
        z = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))  # Y - L
        s_vec = rng.normal(size=d) + 1j * rng.normal(size=d)
        v_vec = rng.normal(size=d) + 1j * rng.normal(size=d)
        mu, eta, c = 2.0, 0.5, 0.6

        def objective(rv):
            e = z - apply_dictionary(dic, rv)
            fid = float(np.sum(huber(part.block_norms(e), c)))
            return (mu / 2.0) * fid + (eta / 2.0) * np.linalg.norm(
                rv - s_vec - v_vec / eta) ** 2

        r = np.zeros(d, dtype=complex)
        prev = objective(r)
        for _ in range(8):
            e = z - apply_dictionary(dic, r)
            w = part.expand(np.sqrt(huber_majorizer_weight(part.block_norms(e), c)),
                            e.shape)
            r = weighted_ridge_update(dic, w, z, s_vec, v_vec, mu, eta)
            cur = objective(r)
            assert cur <= prev + 1e-10
            prev = cur


def test_hkrpca_split_consistency_at_convergence():
    dic, y, _, _ = _noiseless_scene()
    cfg = SolverConfig(outer_iters=250, tol=0.0)
    sd = hkrpca_sd_solve(y, dic, Partition.pointwise(), cfg)
    assert np.linalg.norm(sd.aux_low_rank - sd.L) < 1e-3 * np.linalg.norm(y)
    fd = hkrpca_fd_solve(y, dic, Partition.pointwise(), cfg)
    assert np.linalg.norm(fd.aux_low_rank - fd.L) < 1e-3 * np.linalg.norm(y)
    assert np.linalg.norm(fd.aux_scene - fd.R) < 1e-3 * np.linalg.norm(y)


def test_solver_config_validation():
    with pytest.raises(InputError):
        SolverConfig(mu=0.0)
    with pytest.raises(InputError):
        SolverConfig(outer_iters=0)
    with pytest.raises(InputError):
        SolverConfig(huber_c=-0.1)
