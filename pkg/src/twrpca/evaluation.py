"""Detection maps, ROC curves and summary scores.

A detection map collapses the scene matrix to one nonnegative score per
pixel (the l2 norm across multipath columns), arranged crossrange-major on
the grid. Target detection uses a disc rule: a target counts as detected at
threshold tau if any pixel within `radius` (Euclidean, in pixels) of its
true pixel scores >= tau; false alarms are scored over pixels outside every
target disc. Ties count as positive, so a constant map traces the curve
{(0,0), (1,1)} and integrates to 0.5.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError

DEFAULT_RADIUS = 2.0
_FPR_GRID = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class DetectionMap:
    """Nonnegative per-pixel scores on an (n_x, n_z) grid."""

    values: np.ndarray
    grid: object = None


def detection_map(r_mat, grid):
    """Collapse the (n_pixels, n_paths) scene matrix to per-pixel row norms,
    reshaped crossrange-major to (n_x, n_z)."""
    r_mat = np.asarray(r_mat)
    if r_mat.ndim == 1:
        r_mat = r_mat[:, None]
    if r_mat.shape[0] != grid.n_pixels:
        raise InputError(
            f"scene matrix has {r_mat.shape[0]} rows, grid has {grid.n_pixels} pixels")
    vals = np.linalg.norm(r_mat, axis=1).reshape(grid.n_x, grid.n_z)
    return DetectionMap(values=vals, grid=grid)


@dataclass(frozen=True)
class RocCurve:
    """Operating points ordered by decreasing threshold (fpr and tpr both
    non-decreasing along the curve). thresholds is None for averaged
    curves, whose points live on a fixed false-alarm grid."""

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray | None = None

    @property
    def auc(self):
        return auc(self)


def _disc_masks(shape, truth_pixels, radius):
    ix_grid, iz_grid = np.meshgrid(np.arange(shape[0]), np.arange(shape[1]), indexing="ij")
    masks = []
    for ix, iz in truth_pixels:
        if not (0 <= ix < shape[0] and 0 <= iz < shape[1]):
            raise InputError(f"target pixel ({ix}, {iz}) is outside the map")
        masks.append((ix_grid - ix) ** 2 + (iz_grid - iz) ** 2 <= radius ** 2)
    return masks


def roc_curve(dmap, truth_pixels, radius=DEFAULT_RADIUS, thresholds=None):
    """Sweep thresholds over a detection map against true target pixels.

    truth_pixels: sequence of (ix, iz) grid indices, at least one. The
    default threshold set is +inf plus every distinct map value in
    decreasing order, which pins the endpoints (0,0) and (1,1).
    """
    truth_pixels = list(truth_pixels)
    if not truth_pixels:
        raise InputError("need at least one target pixel")
    values = np.asarray(dmap.values, dtype=float)
    masks = _disc_masks(values.shape, truth_pixels, radius)
    inside_any = np.logical_or.reduce(masks)
    outside = values[~inside_any]
    disc_maxima = np.array([values[m].max() for m in masks])
    if thresholds is None:
        thresholds = np.concatenate([[np.inf], np.unique(values)[::-1]])
    else:
        thresholds = np.asarray(thresholds, dtype=float)
    # detected at tau: score >= tau (ties positive)
    outside_sorted = np.sort(outside)
    n_out = outside.size
    fpr = np.empty(thresholds.size)
    tpr = np.empty(thresholds.size)
    for i, tau in enumerate(thresholds):
        tpr[i] = np.mean(disc_maxima >= tau)
        if n_out == 0:
            fpr[i] = 0.0
        else:
            fpr[i] = (n_out - np.searchsorted(outside_sorted, tau, side="left")) / n_out
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds)


def auc(curve):
    """Trapezoidal area under tpr over fpr."""
    f, t = np.asarray(curve.fpr, dtype=float), np.asarray(curve.tpr, dtype=float)
    order = np.argsort(f, kind="stable")
    f, t = f[order], t[order]
    return float(0.5 * np.sum((f[1:] - f[:-1]) * (t[1:] + t[:-1])))


def _tpr_on_grid(curve):
    f = np.asarray(curve.fpr, dtype=float)
    t = np.asarray(curve.tpr, dtype=float)
    order = np.argsort(f, kind="stable")
    f, t = f[order], t[order]
    # collapse duplicate fpr values to their best tpr before interpolating
    uf, inverse = np.unique(f, return_inverse=True)
    ut = np.zeros_like(uf)
    np.maximum.at(ut, inverse, t)
    return np.interp(_FPR_GRID, uf, ut, left=0.0, right=1.0)


def average_rocs(curves):
    """Vertical (tpr) average of curves on a fixed 101-point fpr grid."""
    curves = list(curves)
    if not curves:
        raise InputError("need at least one curve to average")
    stack = np.vstack([_tpr_on_grid(c) for c in curves])
    return RocCurve(fpr=_FPR_GRID.copy(), tpr=stack.mean(axis=0), thresholds=None)


def f1_at_threshold(dmap, truth_pixels, radius, tau):
    """F1 score at one threshold under the disc rule.

    Recall is the fraction of targets detected; precision is the fraction of
    detected pixels lying inside some target disc (the same counts feeding
    the ROC's false-alarm rate). No detected pixels gives F1 = 0.
    """
    truth_pixels = list(truth_pixels)
    if not truth_pixels:
        raise InputError("need at least one target pixel")
    values = np.asarray(dmap.values, dtype=float)
    masks = _disc_masks(values.shape, truth_pixels, radius)
    inside_any = np.logical_or.reduce(masks)
    detected = values >= tau
    recall = float(np.mean([detected[m].any() for m in masks]))
    tp_px = int(np.sum(detected & inside_any))
    fp_px = int(np.sum(detected & ~inside_any))
    if tp_px + fp_px == 0:
        return 0.0
    precision = tp_px / (tp_px + fp_px)
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)
