"""Experiment configuration: flat sectioned key-value text.

One `section.key = value` per line; blank lines and `#` comments are
ignored; units are spelled in key names. Unknown keys are rejected with
their line number. Keys:

wall.thickness_m, wall.permittivity, wall.standoff_m,
wall.reverb_amplitudes (comma list, complex ok), wall.jitter
radar.n_positions, radar.position_start_m, radar.position_step_m,
radar.n_freqs, radar.freq_start_hz, radar.freq_step_hz
scene.n_x, scene.n_z, scene.x_min_m, scene.x_max_m, scene.z_min_m,
scene.z_max_m, scene.multipath (comma list: direct | ringing:K |
bounce:AXIS:POS_M)
targets.positions_m (comma list of X:Z pairs), targets.amplitudes
noise.structure (pointwise|columnwise), noise.dof, noise.snr_db,
noise.outlier_count, noise.outlier_structure (point|column)
solver.lambda, solver.mu, solver.nu, solver.eta, solver.huber_c,
solver.outer_iters, solver.inner_iters, solver.pgd_step (number or auto),
solver.tol, solver.dual_balancing (on|off), solver.subspace_rank
output.dir, output.seed

The wall, radar and scene sections are required; targets, noise, solver and
output fall back to defaults (no targets, no noise, default solver config,
./out, seed 0).
"""

import math
from dataclasses import dataclass, field

from .errors import InputError
from .geometry import MultipathScheme, RadarConfig, SceneGrid, WallSpec
from .noise import NoiseSpec
from .solvers import SolverConfig

_KNOWN_KEYS = {
    "wall.thickness_m", "wall.permittivity", "wall.standoff_m",
    "wall.reverb_amplitudes", "wall.jitter",
    "radar.n_positions", "radar.position_start_m", "radar.position_step_m",
    "radar.n_freqs", "radar.freq_start_hz", "radar.freq_step_hz",
    "scene.n_x", "scene.n_z", "scene.x_min_m", "scene.x_max_m",
    "scene.z_min_m", "scene.z_max_m", "scene.multipath",
    "targets.positions_m", "targets.amplitudes",
    "noise.structure", "noise.dof", "noise.snr_db",
    "noise.outlier_count", "noise.outlier_structure",
    "solver.lambda", "solver.mu", "solver.nu", "solver.eta", "solver.huber_c",
    "solver.outer_iters", "solver.inner_iters", "solver.pgd_step",
    "solver.tol", "solver.dual_balancing", "solver.subspace_rank",
    "output.dir", "output.seed",
}


@dataclass
class ExperimentConfig:
    wall: WallSpec
    radar: RadarConfig
    grid: SceneGrid
    target_positions: tuple = ()
    target_amplitudes: tuple = ()
    wall_jitter: float = 0.0
    noise: NoiseSpec | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    subspace_rank: int = 1
    output_dir: str = "out"
    base_seed: int = 0


def parse_config_text(text):
    """Raw key -> value map with duplicate/format/unknown-key errors carrying
    line numbers."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"line {lineno}: expected `section.key = value`, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise InputError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise InputError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def _get(values, key, convert, default=None, required=False):
    if key not in values:
        if required:
            raise InputError(f"missing required key {key!r}")
        return default
    try:
        return convert(values[key])
    except InputError:
        raise
    except (ValueError, TypeError) as exc:
        raise InputError(f"key {key!r}: bad value {values[key]!r} ({exc})") from exc


def _complex_list(text):
    items = [s.strip() for s in text.split(",") if s.strip()]
    return tuple(complex(s) for s in items)


def _position_list(text):
    out = []
    for item in (s.strip() for s in text.split(",") if s.strip()):
        x, z = item.split(":")
        out.append((float(x), float(z)))
    return tuple(out)


def _schemes(text):
    return tuple(MultipathScheme.parse(s) for s in text.split(",") if s.strip())


def _on_off(text):
    t = text.strip().lower()
    if t in ("on", "true", "1", "yes"):
        return True
    if t in ("off", "false", "0", "no"):
        return False
    raise ValueError(f"expected on/off, got {text!r}")


def _pgd_step(text):
    t = text.strip().lower()
    return None if t == "auto" else float(t)


def config_from_values(values):
    """Build the typed configuration from a parsed key map."""
    wall = WallSpec(
        thickness=_get(values, "wall.thickness_m", float, required=True),
        permittivity=_get(values, "wall.permittivity", float, required=True),
        standoff=_get(values, "wall.standoff_m", float, required=True),
        reverb_amplitudes=_get(values, "wall.reverb_amplitudes", _complex_list,
                               default=(0.7,)),
    )
    radar = RadarConfig(
        n_positions=_get(values, "radar.n_positions", int, required=True),
        position_start=_get(values, "radar.position_start_m", float, required=True),
        position_step=_get(values, "radar.position_step_m", float, required=True),
        n_freqs=_get(values, "radar.n_freqs", int, required=True),
        omega_start=2.0 * math.pi * _get(values, "radar.freq_start_hz", float, required=True),
        omega_step=2.0 * math.pi * _get(values, "radar.freq_step_hz", float, required=True),
    )
    grid = SceneGrid(
        n_x=_get(values, "scene.n_x", int, required=True),
        n_z=_get(values, "scene.n_z", int, required=True),
        x_min=_get(values, "scene.x_min_m", float, required=True),
        x_max=_get(values, "scene.x_max_m", float, required=True),
        z_min=_get(values, "scene.z_min_m", float, required=True),
        z_max=_get(values, "scene.z_max_m", float, required=True),
        schemes=_get(values, "scene.multipath", _schemes,
                     default=(MultipathScheme.direct(),)),
    )
    noise = None
    if any(k.startswith("noise.") for k in values):
        noise = NoiseSpec(
            structure=_get(values, "noise.structure", str, default="pointwise"),
            dof=_get(values, "noise.dof", float, default=4.0),
            snr_db=_get(values, "noise.snr_db", float, default=10.0),
            n_outliers=_get(values, "noise.outlier_count", int, default=0),
            outlier_structure=_get(values, "noise.outlier_structure", str, default="point"),
        )
    solver = SolverConfig(
        lam=_get(values, "solver.lambda", float, default=1.0),
        mu=_get(values, "solver.mu", float, default=10.0),
        nu=_get(values, "solver.nu", float, default=1.0),
        eta=_get(values, "solver.eta", float, default=1e10),
        huber_c=_get(values, "solver.huber_c", float, default=0.1),
        outer_iters=_get(values, "solver.outer_iters", int, default=200),
        inner_iters=_get(values, "solver.inner_iters", int, default=1),
        pgd_step=_get(values, "solver.pgd_step", _pgd_step, default=None),
        tol=_get(values, "solver.tol", float, default=1e-6),
        dual_balancing=_get(values, "solver.dual_balancing", _on_off, default=True),
    )
    return ExperimentConfig(
        wall=wall, radar=radar, grid=grid,
        target_positions=_get(values, "targets.positions_m", _position_list, default=()),
        target_amplitudes=_get(values, "targets.amplitudes", _complex_list, default=()),
        wall_jitter=_get(values, "wall.jitter", float, default=0.0),
        noise=noise, solver=solver,
        subspace_rank=_get(values, "solver.subspace_rank", int, default=1),
        output_dir=_get(values, "output.dir", str, default="out"),
        base_seed=_get(values, "output.seed", int, default=0),
    )


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    return config_from_values(parse_config_text(text))


def example_config_text():
    """Desk-scale default scene: 0.2 m wall at eps 4.5, 1.2 m standoff,
    16 positions, 64 frequencies over 1-3 GHz, 32x32 grid, two targets."""
    return """\
# desk-scale through-wall scene
wall.thickness_m = 0.2
wall.permittivity = 4.5
wall.standoff_m = 1.2
wall.reverb_amplitudes = 0.7, 0.49
wall.jitter = 0.0

radar.n_positions = 16
radar.position_start_m = 1.824
radar.position_step_m = 0.02
radar.n_freqs = 64
radar.freq_start_hz = 1.0e9
radar.freq_step_hz = 31.746e6

scene.n_x = 32
scene.n_z = 32
scene.x_min_m = 0.95
scene.x_max_m = 4.15
scene.z_min_m = 1.55
scene.z_max_m = 4.75
scene.multipath = direct

targets.positions_m = 2.6:4.0, 3.2:3.1
targets.amplitudes = 1.0, 1.0

solver.lambda = 1.0
solver.mu = 10.0

output.dir = out
output.seed = 1234
"""
