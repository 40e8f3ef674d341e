"""Wall/scene decomposition solvers.

All four methods share the data model Y = L + A(r): L carries the (low-rank)
wall returns, r is the stacked scene vector whose unvec R = (n_pixels x
n_paths) is row-sparse, and A is apply_dictionary. The solvers:

- srcs_solve: two-step baseline; project out the wall subspace, then solve
  the group-sparse least-squares problem by proximal gradient descent.
- krpca_solve: exact decomposition constraint, handled by an augmented
  Lagrangian with singular value thresholding for L and proximal gradient
  for r.
- hkrpca_sd_solve: Huber-robust fidelity over a residual partition; the
  nuclear norm is moved onto a split variable (M = L); L gets a blockwise
  radial Huber prox, r a weighted proximal gradient step.
- hkrpca_fd_solve: additionally splits the scene vector (S = R) and updates
  r by majorize-minimize steps, each solving a weighted ridge system.

Iterates are deterministic for fixed inputs and config. Diagnostics record
each method's own objective (they are not comparable across methods),
constraint/split residuals, and wall time per outer iteration.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dictionary import apply_dictionary
from .errors import InputError, NumericalError
from .proxops import huber, huber_majorizer_weight, row_threshold, svt

_MAX_STEP_HALVINGS = 30


@dataclass
class SolverConfig:
    """Shared solver hyperparameters.

    lam: group-sparsity weight. mu: data-fidelity weight (augmented
    Lagrangian parameter of the exact-constraint method). nu / eta: dual
    parameters of the low-rank and scene splits. huber_c: Huber crossover.
    pgd_step: fixed proximal-gradient step; None derives it from the cached
    dictionary spectrum. dual_balancing: adapt nu/eta when the primal and
    dual split residuals drift more than 10x apart.
    """

    lam: float = 1.0
    mu: float = 10.0
    nu: float = 1.0
    eta: float = 1e10
    huber_c: float = 0.1
    outer_iters: int = 200
    inner_iters: int = 1
    pgd_step: float | None = None
    tol: float = 1e-6
    dual_balancing: bool = True

    def __post_init__(self):
        for name in ("lam", "mu", "nu", "eta", "huber_c"):
            if not getattr(self, name) > 0.0:
                raise InputError(f"{name} must be positive, got {getattr(self, name)}")
        if self.outer_iters < 1 or self.inner_iters < 1:
            raise InputError("iteration budgets must be >= 1")
        if self.pgd_step is not None and not self.pgd_step > 0.0:
            raise InputError(f"pgd_step must be positive, got {self.pgd_step}")
        if self.tol < 0.0:
            raise InputError(f"tol must be nonnegative, got {self.tol}")


@dataclass
class Diagnostics:
    """Per-outer-iteration history."""

    objective: list = field(default_factory=list)
    primal_residual: list = field(default_factory=list)
    dual_residual: list = field(default_factory=list)
    seconds: list = field(default_factory=list)

    def record(self, obj, primal, dual, sec):
        self.objective.append(float(obj))
        self.primal_residual.append(float(primal))
        self.dual_residual.append(float(dual))
        self.seconds.append(float(sec))

    def rows(self):
        return [(i + 1, o, p, d, s) for i, (o, p, d, s) in enumerate(
            zip(self.objective, self.primal_residual, self.dual_residual, self.seconds))]


@dataclass
class DecompositionResult:
    """Solver output: wall estimate L, scene matrix R (n_pixels x n_paths),
    duals where the method has them, split auxiliaries for the Huber methods,
    plus diagnostics and convergence status."""

    L: np.ndarray
    R: np.ndarray
    diagnostics: Diagnostics
    converged: bool
    iterations: int
    U: np.ndarray | None = None
    V: np.ndarray | None = None
    aux_low_rank: np.ndarray | None = None
    aux_scene: np.ndarray | None = None

    @property
    def r(self):
        return self.R.ravel(order="F")


def _vec(x):
    return x.ravel(order="F")


def _unvec(w, m, n):
    return w.reshape(m, n, order="F")


def _scene_shape(dictionary):
    grid = dictionary.grid
    if grid is not None:
        return grid.n_pixels, grid.n_paths
    return dictionary.n_columns, 1


def _nuclear_norm(a):
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def _l21_norm(a):
    return float(np.sum(np.linalg.norm(a, axis=1)))


def _rel_change(new_l, old_l, new_r, old_r):
    delta = np.sqrt(np.linalg.norm(new_l - old_l) ** 2 + np.linalg.norm(new_r - old_r) ** 2)
    denom = np.sqrt(np.linalg.norm(new_l) ** 2 + np.linalg.norm(new_r) ** 2)
    return delta / max(denom, 1e-12)


def _validate_data(y, dictionary):
    y = np.asarray(y, dtype=np.complex128)
    expect = (dictionary.n_freqs, dictionary.n_positions)
    if y.shape != expect:
        raise InputError(f"data must have shape {expect}, got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise InputError("data contains non-finite entries")
    return y


def _init_state(init, key, shape, dtype=np.complex128):
    if init and key in init and init[key] is not None:
        arr = np.array(init[key], dtype=dtype)
        if arr.shape != shape:
            raise InputError(f"init[{key!r}] must have shape {shape}, got {arr.shape}")
        return arr
    return np.zeros(shape, dtype=dtype)


def wall_subspace_removal(y, q):
    """Subtract the projection of Y onto its top-q left singular subspace.
    q = 0 returns Y unchanged."""
    y = np.asarray(y)
    if not 0 <= q <= min(y.shape):
        raise InputError(f"subspace rank must be in [0, {min(y.shape)}], got {q}")
    if q == 0:
        return y.copy()
    try:
        u, _, _ = np.linalg.svd(y, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"wall subspace removal: SVD failed ({exc})") from exc
    uq = u[:, :q]
    return y - uq @ (uq.conj().T @ y)


def srcs_solve(y, dictionary, cfg, q=1):
    """Subspace-removal baseline: delete the top-q wall subspace, then
    minimize 0.5 ||vec(Y') - Psi_A r||^2 + lam * ||unvec(r)||_{2,1} by
    proximal gradient with fixed step 1/lambda_max(Psi_A^H Psi_A).

    The returned L is the removed subspace component. Raises NumericalError
    if the objective increases by more than 1e-6 relatively for 10
    consecutive iterations.
    """
    y = _validate_data(y, dictionary)
    y_proj = wall_subspace_removal(y, q)
    l_removed = y - y_proj
    target = _vec(y_proj)
    psi = dictionary.psi_a
    adj = dictionary.adjoint
    step = cfg.pgd_step if cfg.pgd_step is not None else 1.0 / dictionary.lambda_max()
    n_pix, n_paths = _scene_shape(dictionary)
    r = np.zeros(dictionary.n_columns, dtype=np.complex128)
    diag = Diagnostics()
    converged = False
    prev_obj = np.inf
    bad_streak = 0
    it = 0
    for it in range(1, cfg.outer_iters + 1):
        t0 = time.perf_counter()
        w = psi @ r
        grad = adj @ (w - target)
        r_mat = row_threshold(_unvec(r - step * grad, n_pix, n_paths), cfg.lam * step)
        r_new = _vec(r_mat)
        w_new = psi @ r_new
        obj = 0.5 * np.linalg.norm(w_new - target) ** 2 + cfg.lam * _l21_norm(r_mat)
        if obj > prev_obj * (1.0 + 1e-6):
            bad_streak += 1
            if bad_streak >= 10:
                raise NumericalError(
                    f"group-sparse PGD diverging: objective rose for {bad_streak} "
                    f"consecutive iterations (iteration {it}, objective {obj:.6e})")
        else:
            bad_streak = 0
        rel = np.linalg.norm(r_new - r) / max(np.linalg.norm(r_new), 1e-12)
        diag.record(obj, np.linalg.norm(w_new - target), 0.0, time.perf_counter() - t0)
        r = r_new
        prev_obj = obj
        if rel < cfg.tol:
            converged = True
            break
    return DecompositionResult(L=l_removed, R=_unvec(r, n_pix, n_paths),
                               diagnostics=diag, converged=converged, iterations=it)


def krpca_solve(y, dictionary, cfg, init=None):
    """Exact-constraint decomposition min ||L||_* + lam ||unvec(r)||_{2,1}
    s.t. Y = L + A(r), by an augmented Lagrangian with parameter mu.

    Per outer iteration: L by singular value thresholding of the displaced
    residual, r by inner_iters proximal gradient steps on the quadratic
    coupling (fixed step 1/lambda_max(mu * Gram)), then dual ascent on U.
    Stops when the joint relative change of (L, r) drops below tol.

    init may carry warm-start arrays keyed "L", "R", "U".
    """
    y = _validate_data(y, dictionary)
    m, n = y.shape
    n_pix, n_paths = _scene_shape(dictionary)
    gram = dictionary.gram()
    t = cfg.pgd_step if cfg.pgd_step is not None else 1.0 / (cfg.mu * dictionary.lambda_max())
    grad_step = t * cfg.mu           # multiplier of (n + Gram r) in the r step
    thresh = cfg.lam * t
    l_mat = _init_state(init, "L", (m, n))
    r_state = _init_state(init, "R", (n_pix, n_paths))
    u = _init_state(init, "U", (m, n))
    r = _vec(r_state)
    ar = apply_dictionary(dictionary, r)
    diag = Diagnostics()
    converged = False
    it = 0
    for it in range(1, cfg.outer_iters + 1):
        t0 = time.perf_counter()
        l_old, r_old, ar_old = l_mat, r, ar
        l_mat = svt(y - ar + u / cfg.mu, 1.0 / cfg.mu)
        n_vec = dictionary.adjoint_vec(l_mat - y - u / cfg.mu)
        r_mat = _unvec(r, n_pix, n_paths)
        for _ in range(cfg.inner_iters):
            r_mat = row_threshold(
                _unvec(_vec(r_mat) - grad_step * (n_vec + gram @ _vec(r_mat)),
                       n_pix, n_paths), thresh)
        r = _vec(r_mat)
        ar = apply_dictionary(dictionary, r)
        u = u + cfg.mu * (y - l_mat - ar)
        primal = np.linalg.norm(y - l_mat - ar)
        dual = cfg.mu * np.linalg.norm(ar - ar_old)
        obj = _nuclear_norm(l_mat) + cfg.lam * _l21_norm(r_mat)
        diag.record(obj, primal, dual, time.perf_counter() - t0)
        if _rel_change(l_mat, l_old, r, r_old) < cfg.tol:
            converged = True
            break
    return DecompositionResult(L=l_mat, R=_unvec(r, n_pix, n_paths), diagnostics=diag,
                               converged=converged, iterations=it, U=u)


def huber_residual_gradient(e, dictionary, partition, c):
    """Gradient (factor-2 Wirtinger convention) of sum_i Huber_c(||E_i||_F)
    over the partition blocks with respect to the stacked scene vector,
    where E = Y - L - A(r).

    The per-block influence Huber_c'(e)/e scales the residual entries (1 on
    quadratic-branch blocks, including the zero-norm limit; c/e beyond), and
    one adjoint product collapses the block double sum.
    """
    e = np.asarray(e)
    w2 = huber_majorizer_weight(partition.block_norms(e), c)
    return -dictionary.adjoint_vec(partition.expand(w2, e.shape) * e)


def _huber_fidelity(e, partition, c):
    return float(np.sum(huber(partition.block_norms(e), c)))


def _huber_prox_l_update(y, ar, m_split, u, partition, mu, nu, c):
    """Blockwise L-update: radial Huber prox of the displaced split residual,
    translated back by the data residual (closed form of the fidelity +
    split-penalty subproblem)."""
    b = m_split + u / nu - y + ar
    a = mu / (2.0 * nu)
    norms = partition.block_norms(b)
    # radial prox factor of a*Huber_c per block; finite (1/(1+a)) at zero norm
    factors = 1.0 - a / np.maximum(norms / c, a + 1.0)
    return partition.expand(factors, b.shape) * b + (y - ar)


def _balance(param, primal, dual):
    if primal > 10.0 * dual:
        return param * 2.0
    if dual > 10.0 * primal:
        return param / 2.0
    return param


def hkrpca_sd_solve(y, dictionary, partition, cfg, init=None):
    """Huber-robust decomposition with the low-rank split (M = L).

    min ||M||_* + lam ||unvec(r)||_{2,1} + mu/2 sum_i Huber_c(||[Y - L -
    A(r)]_i||_F) over the residual partition, s.t. M = L. Per outer
    iteration: blockwise radial Huber prox for L, inner_iters weighted
    proximal gradient steps for r (step 2/(mu*lambda_max(Gram)), halved if
    the composite inner objective ever increases), singular value
    thresholding for M, dual ascent on U, optional nu balancing.

    init may carry "L", "R", "M", "U".
    """
    y = _validate_data(y, dictionary)
    m, n = y.shape
    n_pix, n_paths = _scene_shape(dictionary)
    c = cfg.huber_c
    nu = cfg.nu
    step = cfg.pgd_step if cfg.pgd_step is not None else 2.0 / (cfg.mu * dictionary.lambda_max())
    l_mat = _init_state(init, "L", (m, n))
    r_mat = _init_state(init, "R", (n_pix, n_paths))
    m_split = _init_state(init, "M", (m, n))
    u = _init_state(init, "U", (m, n))
    ar = apply_dictionary(dictionary, _vec(r_mat))
    diag = Diagnostics()
    converged = False
    it = 0
    for it in range(1, cfg.outer_iters + 1):
        t0 = time.perf_counter()
        l_old, r_old, m_old = l_mat, _vec(r_mat), m_split
        l_mat = _huber_prox_l_update(y, ar, m_split, u, partition, cfg.mu, nu, c)
        for _ in range(cfg.inner_iters):
            e = y - l_mat - ar
            g = huber_residual_gradient(e, dictionary, partition, c)
            inner_obj = (cfg.mu / 2.0) * _huber_fidelity(e, partition, c) \
                + cfg.lam * _l21_norm(r_mat)
            s = step
            for _ in range(_MAX_STEP_HALVINGS):
                trial = row_threshold(
                    r_mat - s * (cfg.mu / 2.0) * _unvec(g, n_pix, n_paths), cfg.lam * s)
                ar_trial = apply_dictionary(dictionary, _vec(trial))
                trial_obj = (cfg.mu / 2.0) * _huber_fidelity(y - l_mat - ar_trial, partition, c) \
                    + cfg.lam * _l21_norm(trial)
                if trial_obj <= inner_obj * (1.0 + 1e-12) + 1e-15:
                    break
                s *= 0.5  # fidelity rose along the step: reject and halve
            r_mat = trial
            ar = ar_trial
        m_split = svt(l_mat - u / nu, 1.0 / nu)
        u = u + nu * (m_split - l_mat)
        primal = np.linalg.norm(m_split - l_mat)
        dual = nu * np.linalg.norm(m_split - m_old)
        if cfg.dual_balancing:
            nu = _balance(nu, primal, dual)
        obj = _nuclear_norm(m_split) + cfg.lam * _l21_norm(r_mat) \
            + (cfg.mu / 2.0) * _huber_fidelity(y - l_mat - ar, partition, c)
        diag.record(obj, primal, dual, time.perf_counter() - t0)
        if _rel_change(l_mat, l_old, _vec(r_mat), r_old) < cfg.tol:
            converged = True
            break
    return DecompositionResult(L=l_mat, R=r_mat, diagnostics=diag, converged=converged,
                               iterations=it, U=u, aux_low_rank=m_split)


def weighted_ridge_update(dictionary, w, y_minus_l, s_vec, v_vec, mu, eta):
    """Majorize-minimize scene update: solve the weighted ridge system

        (mu/2 Psi_AW^H Psi_AW + eta I) r = mu/2 Psi_AW^H vec(W o (Y-L))
                                           + eta s + v

    where Psi_AW row-scales Psi_A by vec(W). Hermitian positive definite by
    construction; solved by Cholesky factorization (rebuilt every call since
    W changes with the residual)."""
    wv = _vec(w)
    psi_w = wv[:, None] * dictionary.psi_a
    lhs = (mu / 2.0) * (psi_w.conj().T @ psi_w)
    lhs.flat[::lhs.shape[0] + 1] += eta
    rhs = (mu / 2.0) * (psi_w.conj().T @ _vec(w * y_minus_l)) + eta * s_vec + v_vec
    try:
        factor = scipy.linalg.cho_factor(lhs, check_finite=False)
        return scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"weighted ridge system is not positive definite ({exc})") from exc


def hkrpca_fd_solve(y, dictionary, partition, cfg, init=None):
    """Huber-robust decomposition with both splits (M = L, S = R).

    The scene update majorizes each block's Huber term by its sharpest
    quadratic at the current residual norm (weight 1 inside the quadratic
    branch, sqrt(c/e) beyond), giving a weighted ridge system solved in
    closed form; S takes the row shrinkage, and both duals ascend. nu and
    eta are balanced independently when enabled.

    init may carry "L", "R", "M", "S", "U", "V".
    """
    y = _validate_data(y, dictionary)
    m, n = y.shape
    n_pix, n_paths = _scene_shape(dictionary)
    c = cfg.huber_c
    nu, eta = cfg.nu, cfg.eta
    l_mat = _init_state(init, "L", (m, n))
    r_mat = _init_state(init, "R", (n_pix, n_paths))
    m_split = _init_state(init, "M", (m, n))
    s_mat = _init_state(init, "S", (n_pix, n_paths))
    u = _init_state(init, "U", (m, n))
    v = _init_state(init, "V", (n_pix, n_paths))
    ar = apply_dictionary(dictionary, _vec(r_mat))
    diag = Diagnostics()
    converged = False
    it = 0
    for it in range(1, cfg.outer_iters + 1):
        t0 = time.perf_counter()
        l_old, r_old, m_old, s_old = l_mat, _vec(r_mat), m_split, s_mat
        l_mat = _huber_prox_l_update(y, ar, m_split, u, partition, cfg.mu, nu, c)
        for _ in range(cfg.inner_iters):
            e = y - l_mat - ar
            w = partition.expand(
                np.sqrt(huber_majorizer_weight(partition.block_norms(e), c)), e.shape)
            r = weighted_ridge_update(dictionary, w, y - l_mat, _vec(s_mat), _vec(v),
                                      cfg.mu, eta)
            r_mat = _unvec(r, n_pix, n_paths)
            ar = apply_dictionary(dictionary, r)
        m_split = svt(l_mat - u / nu, 1.0 / nu)
        s_mat = row_threshold(r_mat - v / eta, cfg.lam / eta)
        u = u + nu * (m_split - l_mat)
        v = v + eta * (s_mat - r_mat)
        primal_nu = np.linalg.norm(m_split - l_mat)
        dual_nu = nu * np.linalg.norm(m_split - m_old)
        primal_eta = np.linalg.norm(s_mat - r_mat)
        dual_eta = eta * np.linalg.norm(s_mat - s_old)
        if cfg.dual_balancing:
            nu = _balance(nu, primal_nu, dual_nu)
            eta = _balance(eta, primal_eta, dual_eta)
        obj = _nuclear_norm(m_split) + cfg.lam * _l21_norm(s_mat) \
            + (cfg.mu / 2.0) * _huber_fidelity(y - l_mat - ar, partition, c)
        diag.record(obj, np.hypot(primal_nu, primal_eta), np.hypot(dual_nu, dual_eta),
                    time.perf_counter() - t0)
        if _rel_change(l_mat, l_old, _vec(r_mat), r_old) < cfg.tol:
            converged = True
            break
    return DecompositionResult(L=l_mat, R=r_mat, diagnostics=diag, converged=converged,
                               iterations=it, U=u, V=v, aux_low_rank=m_split,
                               aux_scene=s_mat)
