"""Monte Carlo harness: repeated noise draws, solver fan-out, AUC records.

Per-trial seeds are derived by a splittable mix of the base seed and the
trial index, so trial t sees the same data no matter how many trials run,
in what order, or across how many workers.
"""

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import InputError, NumericalError
from .evaluation import DEFAULT_RADIUS, auc, detection_map, roc_curve
from .noise import NoiseSpec, sample_noise
from .partitions import Partition
from .solvers import (SolverConfig, hkrpca_fd_solve, hkrpca_sd_solve, krpca_solve,
                      srcs_solve)

SOLVER_NAMES = ("srcs", "krpca", "hkrpca-sd-pt", "hkrpca-sd-col",
                "hkrpca-fd-pt", "hkrpca-fd-col")


@dataclass(frozen=True)
class Scenario:
    """Everything a trial needs: the forward model products, the truth, and
    the noise model. wall_rank feeds the subspace baseline."""

    dictionary: object
    y_clean: np.ndarray
    truth_pixels: tuple
    noise: NoiseSpec
    wall_rank: int = 1


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    solver: str
    auc: float
    seconds: float
    error: str | None = None


def trial_seed(base_seed, trial):
    """Order-independent 64-bit per-trial seed."""
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(int(trial),))
    return int(ss.generate_state(1, np.uint64)[0])


def make_solver(name, dictionary, cfg, wall_rank=1):
    """Bind a solver name to a Y -> DecompositionResult callable."""
    if name == "srcs":
        return lambda y: srcs_solve(y, dictionary, cfg, q=wall_rank)
    if name == "krpca":
        return lambda y: krpca_solve(y, dictionary, cfg)
    if name.startswith("hkrpca-"):
        try:
            _, variant, part = name.split("-")
        except ValueError:
            raise InputError(f"unknown solver {name!r}") from None
        partition = {"pt": Partition.pointwise, "col": Partition.columnwise}.get(part)
        solve = {"sd": hkrpca_sd_solve, "fd": hkrpca_fd_solve}.get(variant)
        if partition is None or solve is None:
            raise InputError(f"unknown solver {name!r}")
        return lambda y: solve(y, dictionary, partition(), cfg)
    raise InputError(f"unknown solver {name!r}")


def _run_trial(scenario, solver_names, solvers, base_seed, trial, radius):
    y, _ = sample_noise(scenario.y_clean, scenario.noise, trial_seed(base_seed, trial))
    grid = scenario.dictionary.grid
    records = []
    for name, solve in zip(solver_names, solvers):
        t0 = time.perf_counter()
        try:
            result = solve(y)
            dmap = detection_map(result.R, grid)
            score = auc(roc_curve(dmap, scenario.truth_pixels, radius=radius))
            records.append(TrialRecord(trial, name, score, time.perf_counter() - t0))
        except NumericalError as exc:
            records.append(TrialRecord(trial, name, float("nan"),
                                       time.perf_counter() - t0, error=str(exc)))
    return records


def run_monte_carlo(scenario, solver_names, trials, base_seed, cfg=None, workers=1,
                    radius=DEFAULT_RADIUS):
    """Run `trials` independent noise draws through each named solver.

    Every solver sees the identical corrupted data within a trial. A solver
    failure is recorded on its trial (auc = nan) without aborting the run.
    Records come back sorted by (trial, solver name), independent of worker
    count.
    """
    if trials < 1:
        raise InputError(f"need at least one trial, got {trials}")
    cfg = cfg if cfg is not None else SolverConfig()
    solver_names = list(solver_names)
    solvers = [make_solver(n, scenario.dictionary, cfg, scenario.wall_rank)
               for n in solver_names]
    # warm the shared spectral caches before any thread fan-out
    scenario.dictionary.lambda_max()
    if workers <= 1:
        nested = [_run_trial(scenario, solver_names, solvers, base_seed, t, radius)
                  for t in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            nested = list(pool.map(
                lambda t: _run_trial(scenario, solver_names, solvers, base_seed, t, radius),
                range(trials)))
    records = [rec for batch in nested for rec in batch]
    records.sort(key=lambda rec: (rec.trial, rec.solver))
    return records


def summarize_records(records):
    """Per-solver mean/std AUC over the trials that completed."""
    by_solver = {}
    for rec in records:
        by_solver.setdefault(rec.solver, []).append(rec.auc)
    out = {}
    for name, scores in sorted(by_solver.items()):
        arr = np.asarray(scores, dtype=float)
        ok = arr[np.isfinite(arr)]
        out[name] = (float(ok.mean()) if ok.size else float("nan"),
                     float(ok.std()) if ok.size else float("nan"),
                     int(ok.size))
    return out


def write_trial_records(path, records):
    """Trial records as CSV: trial, solver, auc, seconds (plus any error)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "solver", "auc", "seconds", "error"])
        for rec in records:
            writer.writerow([rec.trial, rec.solver, f"{rec.auc:.17g}",
                             f"{rec.seconds:.6f}", rec.error or ""])


def sweep_hyperparameters(scenario, solver_name, lambdas, mus, trials, base_seed,
                          cfg=None, workers=1, radius=DEFAULT_RADIUS):
    """Grid sweep over (lam, mu): rows of (lam, mu, mean_auc, std_auc, n)."""
    cfg = cfg if cfg is not None else SolverConfig()
    rows = []
    for lam in lambdas:
        for mu in mus:
            records = run_monte_carlo(scenario, [solver_name], trials, base_seed,
                                      cfg=replace(cfg, lam=lam, mu=mu),
                                      workers=workers, radius=radius)
            mean, std, n_ok = summarize_records(records)[solver_name]
            rows.append((lam, mu, mean, std, n_ok))
    return rows
