"""Heavy-tailed complex noise and outlier injection.

A complex t variate is g / sqrt(q/f): g circular complex normal with scale
sigma (E|g|^2 = sigma^2) and q chi-square with f degrees of freedom. The
pointwise sampler draws an independent divisor per entry; the columnwise
sampler shares one divisor per column, so every entry of a column is scaled
by the same factor (|t|/|g| is constant within a column).

Draw order is part of the contract (it makes streams reconstructable from
the seed): the real part of g first, then the imaginary part, then the
chi-square divisors; for outliers the support indices first, then the real
and imaginary perturbation parts.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class NoiseSpec:
    """One noise scenario: t-noise structure/dof/level plus optional gross
    outliers on a random support."""

    structure: str = "pointwise"      # "pointwise" | "columnwise"
    dof: float = 4.0
    snr_db: float = 10.0
    n_outliers: int = 0
    outlier_structure: str = "point"  # "point" | "column"

    def __post_init__(self):
        if self.structure not in ("pointwise", "columnwise"):
            raise InputError(f"unknown noise structure {self.structure!r}")
        if not self.dof > 2.0:
            raise InputError(
                f"degrees of freedom must exceed 2 for finite noise power, got {self.dof}")
        if self.n_outliers < 0:
            raise InputError(f"outlier count must be nonnegative, got {self.n_outliers}")
        if self.outlier_structure not in ("point", "column"):
            raise InputError(f"unknown outlier structure {self.outlier_structure!r}")


def calibrate_sigma_for_snr(y_clean, dof, snr_db):
    """Scale sigma so the expected per-entry noise power sigma^2 * f/(f-2)
    sits snr_db below the mean per-entry signal power of y_clean."""
    if not dof > 2.0:
        raise InputError(f"degrees of freedom must exceed 2, got {dof}")
    y_clean = np.asarray(y_clean)
    p_signal = np.linalg.norm(y_clean) ** 2 / y_clean.size
    if p_signal == 0.0:
        raise InputError("signal power is zero; SNR calibration is undefined")
    p_noise = p_signal * 10.0 ** (-snr_db / 10.0)
    return math.sqrt(p_noise * (dof - 2.0) / dof)


def _complex_normal(rng, shape, sigma):
    scale = sigma / math.sqrt(2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_complex_t_pointwise(m, n, dof, sigma, seed):
    """M x N complex t matrix, independent chi-square divisor per entry."""
    if not dof > 0.0:
        raise InputError(f"degrees of freedom must be positive, got {dof}")
    rng = np.random.default_rng(seed)
    g = _complex_normal(rng, (m, n), sigma)
    q = rng.chisquare(dof, size=(m, n))
    return g / np.sqrt(q / dof)


def sample_complex_t_columnwise(m, n, dof, sigma, seed):
    """M x N complex t matrix, one chi-square divisor shared per column."""
    if not dof > 0.0:
        raise InputError(f"degrees of freedom must be positive, got {dof}")
    rng = np.random.default_rng(seed)
    g = _complex_normal(rng, (m, n), sigma)
    q = rng.chisquare(dof, size=n)
    return g / np.sqrt(q / dof)[None, :]


def inject_outliers(y, count, structure, seed):
    """Add standard complex normal outliers on a uniformly drawn support.

    structure "point": `count` distinct entries get an added CN(0, 1) draw;
    returns (corrupted, support) with support an array of (row, col) pairs.
    structure "column": `count` distinct columns get CN(0, I) added to every
    entry; support is the sorted column index array.
    """
    y = np.asarray(y)
    m, n = y.shape
    rng = np.random.default_rng(seed)
    out = y.copy()
    if structure == "point":
        if count > m * n:
            raise InputError(f"cannot place {count} point outliers in {m * n} entries")
        flat = np.sort(rng.choice(m * n, size=count, replace=False))
        rows, cols = np.unravel_index(flat, (m, n))
        out[rows, cols] += _complex_normal(rng, count, 1.0)
        return out, np.column_stack([rows, cols])
    if structure == "column":
        if count > n:
            raise InputError(f"cannot place {count} column outliers in {n} columns")
        cols = np.sort(rng.choice(n, size=count, replace=False))
        out[:, cols] += _complex_normal(rng, (m, count), 1.0)
        return out, cols
    raise InputError(f"unknown outlier structure {structure!r}")


def sample_noise(y_clean, spec, seed):
    """Draw one full noise realization for a scenario: calibrated t noise
    plus outliers. Returns (y_noisy, support). Two independent substreams
    are derived from `seed` so the t noise and the outlier draw never share
    state."""
    ss = np.random.SeedSequence(seed)
    t_seed, o_seed = ss.spawn(2)
    m, n = y_clean.shape
    sigma = calibrate_sigma_for_snr(y_clean, spec.dof, spec.snr_db)
    if spec.structure == "pointwise":
        t = sample_complex_t_pointwise(m, n, spec.dof, sigma, t_seed)
    else:
        t = sample_complex_t_columnwise(m, n, spec.dof, sigma, t_seed)
    y = y_clean + t
    if spec.n_outliers > 0:
        return inject_outliers(y, spec.n_outliers, spec.outlier_structure, o_seed)
    empty = np.empty((0, 2), dtype=int) if spec.outlier_structure == "point" \
        else np.empty(0, dtype=int)
    return y, empty
