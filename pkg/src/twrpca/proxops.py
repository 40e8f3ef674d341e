"""Proximal operators and the Huber loss family.

Closed-form kernels shared by every decomposition solver: complex soft
thresholding, singular value thresholding, row-wise l2 shrinkage (the
l2,1-norm prox), and the Huber loss with its derivative, proximal operator,
radial Frobenius-norm composition, and quadratic-majorizer weight.

All functions are pure and vectorized. Complex sign uses the convention
sgn(x) = x / |x| with sgn(0) = 0, so zeros are always fixed points.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError


@dataclass(frozen=True)
class HuberParams:
    """Threshold c (quadratic/linear crossover) and proximal scale a, i.e. the
    operator is prox_{a * Huber_c}."""

    threshold: float
    scale: float

    def __post_init__(self):
        if not self.threshold > 0.0:
            raise InputError(f"Huber threshold must be positive, got {self.threshold}")
        if not self.scale > 0.0:
            raise InputError(f"Huber proximal scale must be positive, got {self.scale}")


def soft_threshold(x, lam):
    """Elementwise sgn(x) * max(|x| - lam, 0); magnitudes shrink by lam,
    phases are preserved."""
    if lam < 0.0:
        raise InputError(f"threshold must be nonnegative, got {lam}")
    x = np.asarray(x)
    mag = np.abs(x)
    shrunk = np.maximum(mag - lam, 0.0)
    denom = np.where(mag > 0.0, mag, 1.0)
    return x * (shrunk / denom)


def svt(a, lam):
    """Singular value thresholding: soft-threshold the singular values,
    keep the singular vectors.

    Thin SVD, so the cost is O(min(m,n) * m * n). Raises NumericalError if
    the SVD does not converge (e.g. non-finite entries).
    """
    if lam < 0.0:
        raise InputError(f"threshold must be nonnegative, got {lam}")
    a = np.asarray(a)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular value thresholding: SVD failed ({exc})") from exc
    s = np.maximum(s - lam, 0.0)
    return (u * s) @ vh


def row_threshold(a, lam):
    """Row-wise l2 shrinkage, the prox of lam * sum of row norms: each row is
    scaled by (1 - lam / ||row||)_+, so rows with norm <= lam vanish and the
    survivors keep their direction."""
    if lam < 0.0:
        raise InputError(f"threshold must be nonnegative, got {lam}")
    a = np.asarray(a)
    if a.ndim != 2:
        raise InputError(f"row_threshold expects a matrix, got ndim={a.ndim}")
    norms = np.linalg.norm(a, axis=1)
    shrunk = np.maximum(norms - lam, 0.0)
    denom = np.where(norms > 0.0, norms, 1.0)
    return a * (shrunk / denom)[:, None]


def huber(x, c):
    """Huber loss: x^2/2 for |x| <= c, c*(|x| - c/2) beyond. Continuous with
    continuous derivative at the crossover."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    return np.where(ax <= c, 0.5 * x * x, c * (ax - 0.5 * c))


def huber_grad(x, c):
    """Derivative of the Huber loss: identity inside the quadratic branch,
    saturates at c * sgn(x) outside."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= c, x, c * np.sign(x))


def prox_huber(x, params):
    """prox of a * Huber_c applied to the modulus: (1 - a / max(|x/c|, a+1)) * x.

    Quadratic branch divides by (1+a); linear branch translates the modulus
    toward zero by a*c, keeping the phase. Firmly nonexpansive in x.
    """
    a, c = params.scale, params.threshold
    x = np.asarray(x)
    return (1.0 - a / np.maximum(np.abs(x) / c, a + 1.0)) * x


def prox_huber_frobenius(x, params):
    """prox of a * Huber_c composed with the Frobenius norm: shrink the whole
    matrix radially along its own direction. The zero matrix maps to itself."""
    x = np.asarray(x)
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        return np.zeros_like(x)
    return x * (prox_huber(nrm, params) / nrm)


def huber_majorizer_weight(e, c):
    """Squared weight w^2 = Huber_c'(e)/e of the sharpest quadratic majorizer
    of Huber_c at a nonnegative residual norm e.

    1 on the quadratic branch (e <= c, including the e = 0 limit), c/e beyond.
    Also the influence factor that scales residual blocks in the gradient.
    """
    if not c > 0.0:
        raise InputError(f"Huber threshold must be positive, got {c}")
    e = np.asarray(e, dtype=float)
    if np.any(e < 0.0):
        raise InputError("residual norms must be nonnegative")
    return np.where(e <= c, 1.0, c / np.where(e > c, e, 1.0))
