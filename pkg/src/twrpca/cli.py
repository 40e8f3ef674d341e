"""Command line driver.

Subcommands: `generate` synthesizes a scene into matrix files plus a hashed
manifest; `solve` runs one solver on generated data and writes the
decomposition, detection map and per-iteration diagnostics; `sweep` runs a
(lambda, mu) grid of Monte Carlo trials and writes an AUC table.

Exit codes: 0 success, 1 usage or config error, 2 numerical failure.
Thread count comes from --threads or the TWRPCA_THREADS environment
variable.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import matio
from .config import load_config
from .dictionary import Dictionary, build_dictionary
from .errors import InputError, NumericalError
from .evaluation import detection_map
from .geometry import refraction_delay
from .montecarlo import (SOLVER_NAMES, Scenario, make_solver, run_monte_carlo,
                         sweep_hyperparameters, write_trial_records)
from .noise import sample_noise
from .synth import TargetSpec, synthesize_scene, synthesize_wall_returns

_SEED_WALL, _SEED_NOISE = 0, 1


def _sub_seed(base_seed, index):
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _build_products(cfg, base_seed):
    dictionary = build_dictionary(cfg.grid, cfg.radar, cfg.wall)
    wall_y = synthesize_wall_returns(cfg.wall, cfg.radar, jitter=cfg.wall_jitter,
                                     seed=_sub_seed(base_seed, _SEED_WALL))
    if cfg.target_positions:
        targets = TargetSpec(positions=cfg.target_positions,
                             amplitudes=cfg.target_amplitudes)
        r_true, y_targets = synthesize_scene(targets, dictionary)
    else:
        r_true = np.zeros(dictionary.n_columns, dtype=np.complex128)
        y_targets = np.zeros_like(wall_y)
    return dictionary, wall_y, r_true, wall_y + y_targets


def _truth_pixels(cfg, grid):
    return tuple(grid.nearest_pixel(x, z) for x, z in cfg.target_positions)


def cmd_generate(args):
    cfg = load_config(args.config)
    base_seed = args.seed if args.seed is not None else cfg.base_seed
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    dictionary, wall_y, r_true, y_clean = _build_products(cfg, base_seed)
    if cfg.noise is not None:
        y_noisy, _ = sample_noise(y_clean, cfg.noise, _sub_seed(base_seed, _SEED_NOISE))
    else:
        y_noisy = y_clean.copy()

    files = {"psi_a.twrm": dictionary.psi_a, "wall.twrm": wall_y,
             "y_clean.twrm": y_clean, "y_noisy.twrm": y_noisy,
             "truth_r.twrm": r_true[:, None]}
    for name, mat in files.items():
        matio.write_matrix(out / name, mat)
    with open(out / "truth_pixels.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ix", "iz", "x_m", "z_m"])
        for (ix, iz) in _truth_pixels(cfg, cfg.grid):
            writer.writerow([ix, iz, f"{cfg.grid.pixel_xs[ix]:.17g}",
                             f"{cfg.grid.pixel_zs[iz]:.17g}"])

    # debug dump: direct delays from the first position to the first pixels
    tx = (float(cfg.radar.positions[0]), 0.0)
    sample_delays = []
    for ix, iz in [(0, 0), (0, cfg.grid.n_z - 1), (cfg.grid.n_x - 1, 0)]:
        px = float(cfg.grid.pixel_xs[ix])
        pz = float(cfg.grid.pixel_zs[iz])
        sample_delays.append({"pixel": [ix, iz], "x_m": px, "z_m": pz,
                              "tx_m": list(tx),
                              "delay_s": refraction_delay(tx, (px, pz), cfg.wall)})
    manifest = {
        "seed": int(base_seed),
        "shape": {"n_freqs": cfg.radar.n_freqs, "n_positions": cfg.radar.n_positions,
                  "n_x": cfg.grid.n_x, "n_z": cfg.grid.n_z,
                  "n_paths": cfg.grid.n_paths},
        "artifacts": {name: {"sha256": _sha256(out / name),
                             "bytes": (out / name).stat().st_size}
                      for name in sorted([*files, "truth_pixels.csv"])},
        "debug": {"sample_delays": sample_delays},
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"wrote {len(files) + 2} artifacts to {out}")
    return 0


def cmd_solve(args):
    cfg = load_config(args.config)
    data = Path(args.data or args.out or cfg.output_dir)
    out = Path(args.out or data)
    out.mkdir(parents=True, exist_ok=True)
    psi_a = matio.read_matrix(data / "psi_a.twrm")
    y = matio.read_matrix(data / "y_noisy.twrm")
    dictionary = Dictionary(psi_a, cfg.radar.n_freqs, cfg.radar.n_positions,
                            grid=cfg.grid)
    solve = make_solver(args.solver, dictionary, cfg.solver, cfg.subspace_rank)
    result = solve(y)
    matio.write_matrix(out / "L.twrm", result.L)
    matio.write_matrix(out / "R.twrm", result.R)
    dmap = detection_map(result.R, cfg.grid)
    np.savetxt(out / "detection_map.csv", dmap.values, delimiter=",", fmt="%.17g")
    matio.write_pgm16(out / "detection_map.pgm", dmap.values)
    with open(out / "diagnostics.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "objective", "primal_residual",
                         "dual_residual", "seconds"])
        for row in result.diagnostics.rows():
            writer.writerow([row[0], f"{row[1]:.17g}", f"{row[2]:.17g}",
                             f"{row[3]:.17g}", f"{row[4]:.6f}"])
    status = {"solver": args.solver, "converged": bool(result.converged),
              "iterations": int(result.iterations)}
    with open(out / "result.json", "w") as fh:
        json.dump(status, fh, sort_keys=True)
        fh.write("\n")
    print(f"{args.solver}: {'converged' if result.converged else 'budget exhausted'} "
          f"after {result.iterations} iterations")
    return 0


def cmd_sweep(args):
    cfg = load_config(args.config)
    base_seed = args.seed if args.seed is not None else cfg.base_seed
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.noise is None:
        raise InputError("sweep needs a noise section in the config")
    if not cfg.target_positions:
        raise InputError("sweep needs at least one target")
    dictionary, _, _, y_clean = _build_products(cfg, base_seed)
    scenario = Scenario(dictionary=dictionary, y_clean=y_clean,
                        truth_pixels=_truth_pixels(cfg, cfg.grid),
                        noise=cfg.noise, wall_rank=cfg.subspace_rank)
    lambdas = [float(s) for s in args.lambdas.split(",") if s.strip()]
    mus = [float(s) for s in args.mus.split(",") if s.strip()]
    if not lambdas or not mus:
        raise InputError("sweep needs at least one lambda and one mu")
    rows = sweep_hyperparameters(scenario, args.solver, lambdas, mus, args.trials,
                                 base_seed, cfg=cfg.solver, workers=args.threads)
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "mu", "mean_auc", "std_auc", "trials"])
        for lam, mu, mean, std, n_ok in rows:
            writer.writerow([f"{lam:.17g}", f"{mu:.17g}", f"{mean:.17g}",
                             f"{std:.17g}", n_ok])
    if args.trials_csv:
        records = run_monte_carlo(scenario, [args.solver], args.trials, base_seed,
                                  cfg=cfg.solver, workers=args.threads)
        write_trial_records(out / args.trials_csv, records)
    print(f"wrote sweep table ({len(rows)} grid points) to {out / 'sweep.csv'}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="twrpca",
        description="Through-wall radar wall/scene decomposition toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="base seed override")
        p.add_argument("--threads", type=int,
                       default=int(os.environ.get("TWRPCA_THREADS", "1")),
                       help="worker threads for trial fan-out")

    gen = sub.add_parser("generate", help="synthesize scene data and a manifest")
    common(gen)

    sol = sub.add_parser("solve", help="run one solver on generated data")
    common(sol)
    sol.add_argument("--solver", required=True, choices=SOLVER_NAMES)
    sol.add_argument("--data", default=None, help="directory holding generated data")

    swp = sub.add_parser("sweep", help="Monte Carlo sweep over (lambda, mu)")
    common(swp)
    swp.add_argument("--solver", required=True, choices=SOLVER_NAMES)
    swp.add_argument("--trials", type=int, default=10)
    swp.add_argument("--lambdas", default="1.0", help="comma list")
    swp.add_argument("--mus", default="10.0", help="comma list")
    swp.add_argument("--trials-csv", default=None,
                     help="also dump per-trial records to this file name")
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors; remap
        return 0 if exc.code == 0 else 1
    handlers = {"generate": cmd_generate, "solve": cmd_solve, "sweep": cmd_sweep}
    try:
        return handlers[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
