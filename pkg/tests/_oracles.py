"""Independent brute-force reference implementations used by the tests.

Everything here is deliberately naive: dense grid searches with local
refinement for the proximal operators, an explicit Kronecker product for the
dictionary action, a double loop for the Huber gradient, and a plain RPCA
ADMM written from the textbook update equations.  None of it shares code
with the package under test.
"""

import numpy as np
import scipy.linalg


def _zoom_1d(phi, lo, hi, rounds=10, points=201):
    """Global minimizer of a convex phi on [lo, hi] by grid + shrink."""
    for _ in range(rounds):
        ts = np.linspace(lo, hi, points)
        k = int(np.argmin(phi(ts)))
        step = (hi - lo) / (points - 1)
        lo = ts[k] - 2.0 * step
        hi = ts[k] + 2.0 * step
    return 0.5 * (lo + hi)


def _zoom_2d(phi, box, rounds=8, points=61):
    """Minimize phi(u, v) over a square box; returns (u, v)."""
    (ulo, uhi), (vlo, vhi) = box
    for _ in range(rounds):
        us = np.linspace(ulo, uhi, points)
        vs = np.linspace(vlo, vhi, points)
        uu, vv = np.meshgrid(us, vs, indexing="ij")
        vals = phi(uu, vv)
        i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
        du = (uhi - ulo) / (points - 1)
        dv = (vhi - vlo) / (points - 1)
        ulo, uhi = us[i] - 2.0 * du, us[i] + 2.0 * du
        vlo, vhi = vs[j] - 2.0 * dv, vs[j] + 2.0 * dv
    return 0.5 * (ulo + uhi), 0.5 * (vlo + vhi)


def huber_value(t, c):
    t = np.abs(t)
    return np.where(t <= c, 0.5 * t ** 2, c * (t - 0.5 * c))


def prox_l1_complex_grid(x, lam):
    """argmin_u lam|u| + 0.5|u - x|^2 over the complex plane."""
    span = abs(x) + 1.0
    phi = lambda u, v: lam * np.hypot(u, v) + 0.5 * ((u - x.real) ** 2 + (v - x.imag) ** 2)
    u, v = _zoom_2d(phi, ((-span, span), (-span, span)))
    return u + 1j * v


def prox_row2_grid(a, lam):
    """argmin_u lam||u|| + 0.5||u - a||^2 for a real 2-vector a."""
    span = float(np.linalg.norm(a)) + 1.0
    phi = lambda u, v: lam * np.hypot(u, v) + 0.5 * ((u - a[0]) ** 2 + (v - a[1]) ** 2)
    return np.array(_zoom_2d(phi, ((-span, span), (-span, span))))


def prox_huber_1d_grid(x, a, c):
    """argmin_u a*H_c(u) + 0.5(u - x)^2 for real x."""
    span = abs(x) + 1.0
    phi = lambda u: a * huber_value(u, c) + 0.5 * (u - x) ** 2
    return _zoom_1d(phi, -span, span)


def prox_huber_complex_grid(x, a, c):
    span = abs(x) + 1.0
    phi = lambda u, v: a * huber_value(np.hypot(u, v), c) + 0.5 * ((u - x.real) ** 2 + (v - x.imag) ** 2)
    u, v = _zoom_2d(phi, ((-span, span), (-span, span)))
    return u + 1j * v


def prox_huber_radial_grid(x_mat, a, c):
    """Matrix Huber prox via the radial scalar problem on t = ||U||_F."""
    nx = float(np.linalg.norm(x_mat))
    if nx == 0.0:
        return np.zeros_like(x_mat)
    phi = lambda t: a * huber_value(t, c) + 0.5 * (t - nx) ** 2
    t_star = _zoom_1d(phi, 0.0, nx + 1.0)
    return (t_star / nx) * x_mat


def svt_dense(a_mat, lam):
    u, s, vh = scipy.linalg.svd(a_mat, full_matrices=False)
    return (u * np.maximum(s - lam, 0.0)) @ vh


def kron_apply(psi_blocks, r):
    """Psi (I_N kron r) computed through the explicit Kronecker product."""
    n = len(psi_blocks)
    psi = np.hstack(psi_blocks)
    eye_kron_r = np.kron(np.eye(n), np.asarray(r).reshape(-1, 1))
    return psi @ eye_kron_r


def huber_gradient_double_sum(e_mat, psi_blocks, blocks, c):
    """Literal block/entry double sum for the residual gradient.

    blocks: list of index arrays into the column-major flattening of E.
    """
    m, n = e_mat.shape
    d = psi_blocks[0].shape[1]
    e_flat = e_mat.ravel(order="F")
    g = np.zeros(d, dtype=np.complex128)
    for idx in blocks:
        norm = float(np.linalg.norm(e_flat[idx]))
        if norm == 0.0:
            factor = 1.0
        elif norm <= c:
            factor = 1.0
        else:
            factor = c / norm
        for flat in idx:
            j, k = flat % m, flat // m  # row, column in E
            g -= factor * e_mat[j, k] * psi_blocks[k][j, :].conj()
    return g


def wirtinger_fd(f, r, h=1e-6):
    """Central finite differences under f(r+d) ~ f(r) + Re(g^H d)."""
    g = np.zeros_like(r, dtype=np.complex128)
    for k in range(r.size):
        e = np.zeros_like(r)
        e[k] = 1.0
        re = (f(r + h * e) - f(r - h * e)) / (2.0 * h)
        im = (f(r + 1j * h * e) - f(r - 1j * h * e)) / (2.0 * h)
        g[k] = re + 1j * im
    return g


def rpca_admm(y, lam, mu, iters):
    """Plain robust PCA via ADMM: min ||L||_* + lam||S||_1 s.t. Y = L + S."""
    l_mat = np.zeros_like(y)
    s_mat = np.zeros_like(y)
    u_mat = np.zeros_like(y)
    for _ in range(iters):
        w, sv, vh = scipy.linalg.svd(y - s_mat + u_mat / mu, full_matrices=False)
        l_mat = (w * np.maximum(sv - 1.0 / mu, 0.0)) @ vh
        z = y - l_mat + u_mat / mu
        mag = np.abs(z)
        s_mat = np.where(mag > 0, z / np.where(mag > 0, mag, 1.0), 0.0) * np.maximum(mag - lam / mu, 0.0)
        u_mat = u_mat + mu * (y - l_mat - s_mat)
    return l_mat, s_mat
