"""Phase-only measurement dictionary linking scene pixels to radar returns.

For radar position n the block Psi_n is M x D with entries
exp(-j * omega_m * tau), tau the two-way delay from position n to pixel p
under multipath scheme i; columns are ordered scheme-major then
crossrange-major (column = i * n_pixels + ix * n_z + iz). The tall stacked
form Psi_A = [Psi_1; ...; Psi_N] of shape (M*N, D) is the primary stored
representation: the block-diagonal product Psi * (I_N kron r) is never
materialized, it is exactly unvec(Psi_A @ r).

Delay evaluation is embarrassingly parallel over (position, pixel); here it
runs as lockstep vectorized sweeps over all pixels of a position.
"""

import numpy as np

from .errors import InputError, NumericalError
from .geometry import C0, MultipathScheme, _through_wall_paths

_POWER_TOL = 1e-6
_POWER_ITERS = 500


def hermitian_top_eigenvalue(mat, tol=_POWER_TOL, max_iters=_POWER_ITERS):
    """Largest eigenvalue of a Hermitian PSD matrix by power iteration with a
    deterministic start vector; converges when the Rayleigh quotient changes
    by less than tol relatively."""
    d = mat.shape[0]
    rng = np.random.default_rng(0)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iters):
        w = mat @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        lam_new = float(np.real(np.vdot(v, w)))
        v = w / nw
        if abs(lam_new - lam) <= tol * abs(lam_new):
            return lam_new
        lam = lam_new
    raise NumericalError(
        f"power iteration did not converge in {max_iters} iterations "
        f"(last eigenvalue estimate {lam:.6e})")


class Dictionary:
    """Stacked dictionary Psi_A plus cached spectral quantities.

    Attributes: psi_a (M*N, D) complex128; n_freqs M; n_positions N; grid
    (SceneGrid or None for synthetic dictionaries). The Gram matrix
    Psi_A^H Psi_A and its top eigenvalue are computed once on first use and
    cached, so repeated solver runs on one dictionary share them.
    """

    def __init__(self, psi_a, n_freqs, n_positions, grid=None):
        psi_a = np.ascontiguousarray(psi_a, dtype=np.complex128)
        if psi_a.ndim != 2 or psi_a.shape[0] != n_freqs * n_positions:
            raise InputError(
                f"psi_a must be (M*N, D) = ({n_freqs * n_positions}, ...), got {psi_a.shape}")
        if grid is not None and grid.n_pixels * grid.n_paths != psi_a.shape[1]:
            raise InputError(
                f"grid implies {grid.n_pixels * grid.n_paths} columns, psi_a has {psi_a.shape[1]}")
        self.psi_a = psi_a
        self.n_freqs = int(n_freqs)
        self.n_positions = int(n_positions)
        self.grid = grid
        self._adjoint = None
        self._gram = None
        self._lambda_max = None

    @property
    def n_columns(self):
        return self.psi_a.shape[1]

    def block(self, n):
        """The M x D block of radar position n."""
        m = self.n_freqs
        return self.psi_a[n * m:(n + 1) * m, :]

    def wide(self):
        """The M x (D*N) horizontal concatenation [Psi_1 ... Psi_N]. Only for
        small sanity checks; quadratic memory."""
        return np.hstack([self.block(n) for n in range(self.n_positions)])

    @property
    def adjoint(self):
        if self._adjoint is None:
            self._adjoint = np.ascontiguousarray(self.psi_a.conj().T)
        return self._adjoint

    def gram(self):
        """Psi_A^H Psi_A, cached."""
        if self._gram is None:
            self._gram = self.adjoint @ self.psi_a
        return self._gram

    def lambda_max(self):
        """Top eigenvalue of the Gram matrix, cached."""
        if self._lambda_max is None:
            self._lambda_max = hermitian_top_eigenvalue(self.gram())
        return self._lambda_max

    def adjoint_vec(self, x):
        """Psi_A^H vec(X) for an M x N matrix X (column-major vec)."""
        return self.adjoint @ x.ravel(order="F")


def apply_dictionary(dictionary, r):
    """Map a stacked scene vector r (length D) to the M x N measurement
    matrix whose column n is Psi_n r. One GEMV on the stacked form; the
    Kronecker expansion of r is never built."""
    r = np.asarray(r)
    if r.shape != (dictionary.n_columns,):
        raise InputError(
            f"scene vector must have shape ({dictionary.n_columns},), got {r.shape}")
    w = dictionary.psi_a @ r
    return w.reshape(dictionary.n_freqs, dictionary.n_positions, order="F")


def _scheme_delays(scheme, tx_x, px, pz, wall, direct_cache):
    """Two-way delays for every pixel of one position under one scheme."""
    if scheme.kind == "direct":
        if direct_cache[0] is None:
            direct_cache[0] = _through_wall_paths(tx_x, 0.0, px, pz, wall)[0]
        return direct_cache[0]
    if scheme.kind == "ringing":
        if direct_cache[0] is None:
            direct_cache[0] = _through_wall_paths(tx_x, 0.0, px, pz, wall)[0]
        spacing = 2.0 * wall.thickness * np.sqrt(wall.permittivity) / C0
        return direct_cache[0] + scheme.order * spacing
    # bounce: mirror the pixel across the interior plane, then direct delay
    if scheme.plane_axis == "x":
        mx, mz = 2.0 * scheme.plane_position - px, pz
    else:
        mx, mz = px, 2.0 * scheme.plane_position - pz
    if np.any(mz <= wall.back_face):
        raise InputError(
            f"bounce scheme {scheme}: mirrored pixels fall inside or in front of the wall")
    return _through_wall_paths(tx_x, 0.0, mx, mz, wall)[0]


def build_dictionary(grid, radar, wall):
    """Build the stacked dictionary for a scene grid, radar scan and wall.

    Every entry has unit modulus. Raises InputError if any pixel center is
    not strictly behind the wall back face, and NumericalError (with the
    offending position) if a delay search fails.
    """
    zs = grid.pixel_zs
    if zs[0] <= wall.back_face:
        raise InputError(
            f"grid pixels start at z = {zs[0]:.4f} m but the wall back face is at "
            f"{wall.back_face:.4f} m; pixels must be strictly behind the wall")
    px = np.repeat(grid.pixel_xs, grid.n_z)  # crossrange-major flat order
    pz = np.tile(zs, grid.n_x)
    m, n = radar.n_freqs, radar.n_positions
    n_pix = grid.n_pixels
    omegas = radar.omegas
    psi_a = np.empty((m * n, n_pix * grid.n_paths), dtype=np.complex128)
    for pos in range(n):
        tx_x = radar.positions[pos]
        direct_cache = [None]
        for i, scheme in enumerate(grid.schemes):
            try:
                tau = _scheme_delays(scheme, tx_x, px, pz, wall, direct_cache)
            except NumericalError as exc:
                raise NumericalError(f"position {pos} ({scheme}): {exc}") from exc
            block = np.exp(-1j * np.outer(omegas, tau))
            psi_a[pos * m:(pos + 1) * m, i * n_pix:(i + 1) * n_pix] = block
    return Dictionary(psi_a, m, n, grid=grid)
