"""Synthetic measurement generation: wall returns and point-target scenes."""

import warnings
from dataclasses import dataclass

import numpy as np

from .dictionary import apply_dictionary
from .errors import InputError
from .geometry import reverb_delays


@dataclass(frozen=True)
class TargetSpec:
    """Point targets: positions in meters plus a complex amplitude per target
    (broadcast over multipath schemes) or per (target, scheme)."""

    positions: tuple
    amplitudes: tuple = ()

    def __post_init__(self):
        pos = tuple((float(x), float(z)) for x, z in self.positions)
        object.__setattr__(self, "positions", pos)

    @property
    def n_targets(self):
        return len(self.positions)


def synthesize_wall_returns(wall, radar, jitter=0.0, seed=None):
    """M x N wall returns: the reverberation ladder summed per frequency,
    identical across positions (exactly rank 1 at jitter 0). jitter > 0
    multiplies column n elementwise by (1 + jitter * g_n) with seeded
    standard-normal vectors g_n, raising the effective rank for robustness
    experiments."""
    if jitter < 0.0:
        raise InputError(f"jitter must be nonnegative, got {jitter}")
    taus = reverb_delays(wall)
    amps = np.asarray(wall.reverb_amplitudes, dtype=np.complex128)
    col = np.exp(-1j * np.outer(radar.omegas, taus)) @ amps  # (M,)
    y = np.tile(col[:, None], (1, radar.n_positions))
    if jitter > 0.0:
        g = np.random.default_rng(seed).standard_normal(y.shape)
        y = y * (1.0 + jitter * g)
    return y


def _amplitude_table(targets, n_paths):
    p = targets.n_targets
    amps = np.asarray(targets.amplitudes if len(targets.amplitudes) else [1.0] * p,
                      dtype=np.complex128)
    if amps.ndim == 1:
        if amps.shape[0] != p:
            raise InputError(f"need {p} amplitudes (one per target), got {amps.shape[0]}")
        return np.tile(amps[:, None], (1, n_paths))
    if amps.shape != (p, n_paths):
        raise InputError(f"amplitude table must be ({p}, {n_paths}), got {amps.shape}")
    return amps


def synthesize_scene(targets, dictionary):
    """Ground-truth scene vector and its noiseless returns.

    Target positions snap to the nearest pixel center (with a warning when
    they are not already centered); positions outside the grid raise
    InputError. Returns (r, y_clean) with r supported exactly on the target
    pixels in every multipath scheme and y_clean = A(r).
    """
    grid = dictionary.grid
    if grid is None:
        raise InputError("dictionary carries no scene grid; build it from a grid first")
    amps = _amplitude_table(targets, grid.n_paths)
    r = np.zeros(dictionary.n_columns, dtype=np.complex128)
    dx = (grid.x_max - grid.x_min) / grid.n_x
    dz = (grid.z_max - grid.z_min) / grid.n_z
    for p, (x, z) in enumerate(targets.positions):
        ix, iz = grid.nearest_pixel(x, z)
        sx, sz = grid.pixel_xs[ix], grid.pixel_zs[iz]
        if abs(sx - x) > 1e-9 * dx or abs(sz - z) > 1e-9 * dz:
            warnings.warn(
                f"target ({x:g}, {z:g}) snapped to pixel center ({sx:g}, {sz:g})",
                stacklevel=2)
        flat = grid.flat_index(ix, iz)
        for i in range(grid.n_paths):
            r[i * grid.n_pixels + flat] += amps[p, i]
    return r, apply_dictionary(dictionary, r)
