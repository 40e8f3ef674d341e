"""Scene geometry, wall description and through-wall propagation delays.

Coordinates are 2-D (crossrange x, downrange z) in meters. The radar
positions lie on a line parallel to the wall (usually z = 0); the wall slab
occupies z in [standoff, standoff + thickness]; scene pixels sit behind the
back face. Delays are two-way (monostatic) travel times in seconds.

The through-wall delay is the Fermat least-time path across the slab:
air -> slab (refractive index sqrt(eps)) -> air. The path is found by
golden-section search on the front-face crossing abscissa, with the
back-face crossing eliminated through the refraction relation at the front
face, then polished by bisection on the (monotone) refraction mismatch at
the back face so the returned path satisfies the refraction law at both
faces to machine precision.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalError

C0 = 299792458.0  # free-space propagation speed, m/s

_GOLDEN_ITERS = 48
_BISECT_ITERS = 80
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class WallSpec:
    """Homogeneous wall slab parallel to the radar scan line.

    thickness: slab thickness d in meters (0 = no wall).
    permittivity: relative permittivity eps >= 1.
    standoff: distance from the radar line to the front face, meters.
    reverb_amplitudes: complex amplitude per internal reverberation order,
        strictly decreasing in magnitude; length K >= 1 (first entry is the
        primary front-face return).
    """

    thickness: float
    permittivity: float
    standoff: float
    reverb_amplitudes: tuple = (0.7,)

    def __post_init__(self):
        if self.thickness < 0.0:
            raise InputError(f"wall thickness must be >= 0, got {self.thickness}")
        if self.permittivity < 1.0:
            raise InputError(f"wall permittivity must be >= 1, got {self.permittivity}")
        if not self.standoff > 0.0:
            raise InputError(f"wall standoff must be positive, got {self.standoff}")
        amps = tuple(complex(a) for a in self.reverb_amplitudes)
        if len(amps) < 1:
            raise InputError("need at least one reverberation amplitude")
        mags = [abs(a) for a in amps]
        if any(m2 >= m1 for m1, m2 in zip(mags, mags[1:])):
            raise InputError("reverberation amplitudes must decrease strictly in magnitude")
        object.__setattr__(self, "reverb_amplitudes", amps)

    @property
    def reverb_count(self):
        return len(self.reverb_amplitudes)

    @property
    def back_face(self):
        return self.standoff + self.thickness


@dataclass(frozen=True)
class RadarConfig:
    """Stepped-frequency monostatic scan: N positions along the aperture,
    M angular frequencies."""

    n_positions: int
    position_start: float  # crossrange of the first antenna position, m
    position_step: float   # aperture step, m
    n_freqs: int
    omega_start: float     # first angular frequency, rad/s
    omega_step: float      # frequency step, rad/s

    def __post_init__(self):
        if self.n_positions < 1 or self.n_freqs < 1:
            raise InputError("need at least one position and one frequency")
        if not self.position_step > 0.0:
            raise InputError(f"position step must be positive, got {self.position_step}")
        if not self.omega_step > 0.0:
            raise InputError(f"frequency step must be positive, got {self.omega_step}")
        if not self.omega_start > 0.0:
            raise InputError(f"start frequency must be positive, got {self.omega_start}")

    @property
    def positions(self):
        return self.position_start + self.position_step * np.arange(self.n_positions)

    @property
    def omegas(self):
        return self.omega_start + self.omega_step * np.arange(self.n_freqs)


@dataclass(frozen=True)
class MultipathScheme:
    """One propagation mechanism contributing a dictionary block.

    kind "direct": least-time through-wall path.
    kind "bounce": specular reflection at an interior wall plane, modeled by
        mirroring the pixel across the plane (axis "x": plane x = position;
        axis "z": plane z = position) and taking the through-wall delay to
        the image pixel.
    kind "ringing": direct path plus `order` extra round trips inside the
        slab, adding order * 2 * d * sqrt(eps) / c0 to the delay.
    """

    kind: str
    plane_axis: str | None = None
    plane_position: float | None = None
    order: int | None = None

    def __post_init__(self):
        if self.kind not in ("direct", "bounce", "ringing"):
            raise InputError(f"unknown multipath kind {self.kind!r}")
        if self.kind == "bounce":
            if self.plane_axis not in ("x", "z") or self.plane_position is None:
                raise InputError("bounce scheme needs plane_axis in {'x','z'} and plane_position")
        if self.kind == "ringing":
            if self.order is None or int(self.order) < 1:
                raise InputError("ringing scheme needs order >= 1")

    @classmethod
    def direct(cls):
        return cls("direct")

    @classmethod
    def bounce(cls, axis, position):
        return cls("bounce", plane_axis=axis, plane_position=float(position))

    @classmethod
    def ringing(cls, order):
        return cls("ringing", order=int(order))

    @classmethod
    def parse(cls, text):
        """Parse "direct", "ringing:K" or "bounce:AXIS:POS"."""
        parts = [p.strip() for p in text.strip().split(":")]
        try:
            if parts[0] == "direct" and len(parts) == 1:
                return cls.direct()
            if parts[0] == "ringing" and len(parts) == 2:
                return cls.ringing(int(parts[1]))
            if parts[0] == "bounce" and len(parts) == 3:
                return cls.bounce(parts[1], float(parts[2]))
        except ValueError as exc:
            raise InputError(f"bad multipath scheme {text!r}: {exc}") from exc
        raise InputError(f"bad multipath scheme {text!r}")

    def __str__(self):
        if self.kind == "direct":
            return "direct"
        if self.kind == "ringing":
            return f"ringing:{self.order}"
        return f"bounce:{self.plane_axis}:{self.plane_position:g}"


@dataclass(frozen=True)
class SceneGrid:
    """Rectangular pixel grid behind the wall plus the active multipath set.

    Pixels are cell centers; the flat pixel order is crossrange-major:
    flat = ix * n_z + iz.
    """

    n_x: int
    n_z: int
    x_min: float
    x_max: float
    z_min: float
    z_max: float
    schemes: tuple = field(default_factory=lambda: (MultipathScheme.direct(),))

    def __post_init__(self):
        if self.n_x < 1 or self.n_z < 1:
            raise InputError("grid needs at least one pixel per axis")
        if not (self.x_max > self.x_min and self.z_max > self.z_min):
            raise InputError("grid extents must have positive size")
        schemes = tuple(self.schemes)
        if len(schemes) < 1:
            raise InputError("need at least one multipath scheme")
        object.__setattr__(self, "schemes", schemes)

    @property
    def n_pixels(self):
        return self.n_x * self.n_z

    @property
    def n_paths(self):
        return len(self.schemes)

    @property
    def pixel_xs(self):
        dx = (self.x_max - self.x_min) / self.n_x
        return self.x_min + dx * (np.arange(self.n_x) + 0.5)

    @property
    def pixel_zs(self):
        dz = (self.z_max - self.z_min) / self.n_z
        return self.z_min + dz * (np.arange(self.n_z) + 0.5)

    def flat_index(self, ix, iz):
        if not (0 <= ix < self.n_x and 0 <= iz < self.n_z):
            raise InputError(f"pixel ({ix}, {iz}) outside a {self.n_x}x{self.n_z} grid")
        return ix * self.n_z + iz

    def nearest_pixel(self, x, z):
        """Nearest pixel (ix, iz) to a scene point; InputError outside extents."""
        if not (self.x_min <= x <= self.x_max and self.z_min <= z <= self.z_max):
            raise InputError(f"point ({x}, {z}) is outside the grid extents")
        ix = int(np.argmin(np.abs(self.pixel_xs - x)))
        iz = int(np.argmin(np.abs(self.pixel_zs - z)))
        return ix, iz


def _straight_crossings(tx_x, tx_z, px, pz, wall):
    # straight ray: where it pierces the two face planes
    frac_front = (wall.standoff - tx_z) / (pz - tx_z)
    frac_back = (wall.back_face - tx_z) / (pz - tx_z)
    return tx_x + (px - tx_x) * frac_front, tx_x + (px - tx_x) * frac_back


def _through_wall_paths(tx_x, tx_z, px, pz, wall):
    """Vectorized two-way Fermat delay through the slab.

    px, pz are arrays of pixel coordinates. Returns (delay_s, x_front, x_back)
    arrays. Preconditions: tx_z < standoff, pz > standoff + thickness.
    """
    px = np.asarray(px, dtype=float)
    pz = np.asarray(pz, dtype=float)
    if tx_z >= wall.standoff:
        raise InputError("transmitter must be in front of the wall front face")
    if np.any(pz <= wall.back_face):
        raise InputError("scene pixels must lie behind the wall back face")

    d, eps = wall.thickness, wall.permittivity
    if d == 0.0 or eps == 1.0:
        # no slab (or vacuum slab): exact free-space path
        dist = np.hypot(px - tx_x, pz - tx_z)
        xf, xb = _straight_crossings(tx_x, tx_z, px, pz, wall)
        return 2.0 * dist / C0, xf, xb

    air1 = wall.standoff - tx_z
    air2 = pz - wall.back_face
    sq = math.sqrt(eps)

    def x_exit(x1):
        sin1 = (x1 - tx_x) / np.hypot(x1 - tx_x, air1)
        sinw = sin1 / sq
        return x1 + d * sinw / np.sqrt(1.0 - sinw * sinw)

    def one_way_time(x1):
        x2 = x_exit(x1)
        return (np.hypot(x1 - tx_x, air1) + sq * np.hypot(x2 - x1, d)
                + np.hypot(px - x2, air2)) / C0

    def snell_gap(x1):
        # entry-face refraction holds by construction; this is the mismatch
        # at the back face (zero exactly on the least-time path), strictly
        # increasing in x1
        x2 = x_exit(x1)
        sin1 = (x1 - tx_x) / np.hypot(x1 - tx_x, air1)
        sin2 = (px - x2) / np.hypot(px - x2, air2)
        return sin1 - sin2

    a = np.minimum(tx_x, px).astype(float)
    b = np.maximum(tx_x, px).astype(float)

    # golden-section on the travel time over the entry abscissa
    c_ = b - _INVPHI * (b - a)
    d_ = a + _INVPHI * (b - a)
    fc = one_way_time(c_)
    fd = one_way_time(d_)
    for _ in range(_GOLDEN_ITERS):
        left = fc < fd
        a = np.where(left, a, c_)
        b = np.where(left, d_, b)
        c_ = b - _INVPHI * (b - a)
        d_ = a + _INVPHI * (b - a)
        fc = one_way_time(c_)
        fd = one_way_time(d_)

    # bisection polish on the back-face refraction mismatch: time comparisons
    # saturate double precision before the refraction law does
    pad = np.maximum(b - a, 1e-6)
    lo = a - pad
    hi = b + pad
    bad = (snell_gap(lo) > 0.0) | (snell_gap(hi) < 0.0)
    if np.any(bad):
        lo = np.where(bad, np.minimum(tx_x, px) - 1e-6, lo)
        hi = np.where(bad, np.maximum(tx_x, px) + 1e-6, hi)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        below = snell_gap(mid) < 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x1 = 0.5 * (lo + hi)

    gap = np.abs(snell_gap(x1))
    if np.any(gap > 1e-9):
        worst = int(np.argmax(gap))
        raise NumericalError(
            f"through-wall path search did not converge within budget: "
            f"refraction mismatch {gap.flat[worst]:.3e} at pixel index {worst}")
    return 2.0 * one_way_time(x1), x1, x_exit(x1)


def refraction_delay(tx, pixel, wall):
    """Two-way least-time delay (seconds) from antenna `tx` = (x, z) to scene
    point `pixel` = (x, z) through the wall slab and back."""
    delay, _, _ = refraction_path(tx, pixel, wall)
    return delay


def refraction_path(tx, pixel, wall):
    """Like refraction_delay but also returns the crossing abscissae
    (x_front, x_back) of the one-way minimizing path, for checking the
    refraction law."""
    tx_x, tx_z = float(tx[0]), float(tx[1])
    delay, xf, xb = _through_wall_paths(
        tx_x, tx_z, np.asarray([float(pixel[0])]), np.asarray([float(pixel[1])]), wall)
    return float(delay[0]), float(xf[0]), float(xb[0])


def reverb_delays(wall):
    """Two-way delays of the wall's internal reverberation ladder: the k-th
    return (k = 0..K-1) arrives at 2*standoff/c0 + k * 2*d*sqrt(eps)/c0."""
    k = np.arange(wall.reverb_count, dtype=float)
    spacing = 2.0 * wall.thickness * math.sqrt(wall.permittivity) / C0
    return 2.0 * wall.standoff / C0 + k * spacing
