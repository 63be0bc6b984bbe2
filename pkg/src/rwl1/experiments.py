"""Monte-Carlo comparison of plain and reweighted l1 recovery.

Trial ``i`` uses the seed ``base_seed + i``; the matrix, signal and noise
draws get independent child seeds spawned from it, so trials can run in any
order or in parallel and still give identical records.
"""

import csv
import dataclasses
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (SIGNAL_DISTRIBUTIONS, MeasurementInstance, generate_matrix,
                   generate_noise, generate_sparse_signal, noise_level)
from .exceptions import ConfigError, NotConvergedWarning
from .reweight import ReweightConfig, reweighted_l1
from .solver import SolverOptions
from .theory import iterations_to_threshold, limit_L, mu_condition

HIST_WIDTH = 0.05
HIST_BINS = 40  # [0, 2) in steps of 0.05, plus one overflow bin [2, inf)

TRIAL_COLUMNS = ("trial_id", "seed", "d", "m", "s", "matrix_dist", "signal_dist",
                 "sigma", "epsilon", "noise_norm", "noise_exceeded", "err_standard",
                 "err_reweighted", "improvement", "outer_iterations", "converged")

SUMMARY_COLUMNS = ("n_trials", "n_failed", "mean_err_standard", "median_err_standard",
                   "mean_err_reweighted", "median_err_reweighted", "median_improvement",
                   "frac_improved", "histogram")

_REWEIGHT_KEYS = tuple(f.name for f in dataclasses.fields(ReweightConfig))
_SOLVER_KEYS = tuple(f.name for f in dataclasses.fields(SolverOptions))


@dataclass(frozen=True)
class ExperimentConfig:
    d: int = 256
    m: int = 128
    s: int = 30
    matrix_dist: str = "gaussian"
    signal_dist: str = "gaussian"
    sigma: float = 0.1
    trials: int = 50
    base_seed: int = 0
    fixed_matrix: bool = False
    reweight: ReweightConfig = field(default_factory=ReweightConfig)
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        for name in ("d", "m", "s", "trials"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.s > self.d:
            raise ConfigError("s must not exceed d")
        if self.m > self.d:
            raise ConfigError("m must not exceed d")
        if self.matrix_dist not in SIGNAL_DISTRIBUTIONS:
            raise ConfigError(f"matrix_dist must be one of {SIGNAL_DISTRIBUTIONS}")
        if self.signal_dist not in SIGNAL_DISTRIBUTIONS:
            raise ConfigError(f"signal_dist must be one of {SIGNAL_DISTRIBUTIONS}")
        if not (isinstance(self.sigma, (int, float)) and self.sigma >= 0):
            raise ConfigError("sigma must be a nonnegative number")
        if isinstance(self.base_seed, bool) or not isinstance(self.base_seed, int) \
                or not 0 <= self.base_seed < 2**64:
            raise ConfigError("base_seed must be an unsigned 64-bit integer")

    @classmethod
    def from_flat(cls, mapping):
        """Build a config from a flat key/value mapping; unknown keys are errors."""
        top = {f.name for f in dataclasses.fields(cls)} - {"reweight", "solver"}
        unknown = set(mapping) - top - set(_REWEIGHT_KEYS) - set(_SOLVER_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            reweight = ReweightConfig(**{k: mapping[k] for k in _REWEIGHT_KEYS if k in mapping})
            solver = SolverOptions(**{k: mapping[k] for k in _SOLVER_KEYS if k in mapping})
            return cls(reweight=reweight, solver=solver,
                       **{k: mapping[k] for k in top if k in mapping})
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_flat(self):
        flat = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)
                if f.name not in ("reweight", "solver")}
        flat.update(dataclasses.asdict(self.reweight))
        flat.update(dataclasses.asdict(self.solver))
        return flat


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    seed: int
    epsilon: float
    noise_norm: float
    noise_exceeded_epsilon: bool
    err_standard: float
    err_reweighted: float
    improvement: float
    outer_iterations: int
    all_solves_converged: bool
    exact_standard: bool = False
    failed: bool = False


@dataclass(frozen=True)
class ExperimentSummary:
    n_trials: int
    n_failed: int
    mean_err_standard: float
    median_err_standard: float
    mean_err_reweighted: float
    median_err_reweighted: float
    median_improvement: float
    frac_improved: float
    histogram: tuple


def trial_seed(cfg, trial_id):
    return (cfg.base_seed + trial_id) % 2**64


def _child_seeds(seed):
    return [int(v) for v in np.random.SeedSequence(seed).generate_state(3, dtype=np.uint64)]


def make_instance(cfg, trial_id):
    """Draw the measurement instance for one trial."""
    seed = trial_seed(cfg, trial_id)
    matrix_seed, signal_seed, noise_seed = _child_seeds(seed)
    if cfg.fixed_matrix:
        matrix_seed = _child_seeds(cfg.base_seed)[0]
    phi = generate_matrix(cfg.matrix_dist, cfg.m, cfg.d, matrix_seed)
    x = generate_sparse_signal(cfg.d, cfg.s, cfg.signal_dist, signal_seed).to_dense()
    e = generate_noise(cfg.m, cfg.sigma, noise_seed)
    return MeasurementInstance.from_truth(phi, x, e, noise_level(cfg.sigma, cfg.m))


def run_trial(cfg, trial_id):
    """One Monte-Carlo trial: plain l1 (first reweighted iterate) vs. the final iterate."""
    seed = trial_seed(cfg, trial_id)
    eps = noise_level(cfg.sigma, cfg.m)
    try:
        inst = make_instance(cfg, trial_id)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotConvergedWarning)
            trace = reweighted_l1(inst, cfg.reweight, cfg.solver)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError):
        nan = float("nan")
        return TrialRecord(trial_id, seed, eps, nan, False, nan, nan, nan, 0, False,
                           failed=True)
    noise_norm = float(np.linalg.norm(inst.noise))
    err_standard = trace.errors_vs_truth[0]
    err_reweighted = trace.errors_vs_truth[-1]
    exact = err_standard == 0.0
    improvement = 1.0 if exact else err_reweighted / err_standard
    return TrialRecord(
        trial_id=trial_id,
        seed=seed,
        epsilon=float(eps),
        noise_norm=noise_norm,
        noise_exceeded_epsilon=noise_norm > eps,
        err_standard=err_standard,
        err_reweighted=err_reweighted,
        improvement=improvement,
        outer_iterations=trace.n_iterations,
        all_solves_converged=trace.all_converged,
        exact_standard=exact,
    )


def _run_trial_args(args):
    return run_trial(*args)


def histogram(values):
    counts = [0] * (HIST_BINS + 1)
    for v in values:
        counts[min(int(math.floor(v / HIST_WIDTH)), HIST_BINS)] += 1
    return tuple(counts)


def summarize(records):
    ok = [r for r in sorted(records, key=lambda r: r.trial_id) if not r.failed]
    n_failed = len(records) - len(ok)
    if not ok:
        nan = float("nan")
        return ExperimentSummary(0, n_failed, nan, nan, nan, nan, nan, nan,
                                 histogram([]))
    std = np.array([r.err_standard for r in ok])
    rw = np.array([r.err_reweighted for r in ok])
    imp = np.array([r.improvement for r in ok])
    return ExperimentSummary(
        n_trials=len(ok),
        n_failed=n_failed,
        mean_err_standard=float(std.mean()),
        median_err_standard=float(np.median(std)),
        mean_err_reweighted=float(rw.mean()),
        median_err_reweighted=float(np.median(rw)),
        median_improvement=float(np.median(imp)),
        frac_improved=float(np.mean(imp < 1.0)),
        histogram=histogram(imp),
    )


def run_experiment(cfg, workers=1):
    """Run trials 0..cfg.trials-1 and return (records, summary).

    With ``workers > 1`` trials are distributed over a process pool; records
    are always returned in trial_id order.
    """
    ids = range(cfg.trials)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial_args, [(cfg, i) for i in ids], chunksize=1))
    else:
        records = [run_trial(cfg, i) for i in ids]
    records.sort(key=lambda r: r.trial_id)
    return records, summarize(records)


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_trials_csv(path, cfg, records):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRIAL_COLUMNS)
        for r in records:
            writer.writerow([_fmt(v) for v in (
                r.trial_id, r.seed, cfg.d, cfg.m, cfg.s, cfg.matrix_dist, cfg.signal_dist,
                float(cfg.sigma), r.epsilon, r.noise_norm, r.noise_exceeded_epsilon,
                r.err_standard, r.err_reweighted, r.improvement, r.outer_iterations,
                r.all_solves_converged)])


def format_histogram(counts):
    return " ".join(f"{i * HIST_WIDTH:.2f}:{c}" for i, c in enumerate(counts))


def parse_histogram(text):
    return tuple(int(pair.split(":")[1]) for pair in text.split())


def write_summary_csv(path, summary):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(SUMMARY_COLUMNS)
        row = [_fmt(getattr(summary, c)) for c in SUMMARY_COLUMNS[:-1]]
        writer.writerow(row + [format_histogram(summary.histogram)])


def read_trials_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@dataclass(frozen=True)
class ConvergenceRow:
    mu: float
    epsilon: float
    delta: float
    admissible: bool
    L_exact: float
    iters: int


CONVERGENCE_COLUMNS = ("mu", "epsilon", "delta", "L_exact", "iters", "admissible")


def convergence_study(mu, eps_list, delta_grid, rel_tol=1e-3):
    """Iterations needed by the error recursion to reach its limit, per (eps, delta).

    Triples violating the mu-condition are kept with ``admissible=False``.
    """
    rows = []
    for eps in eps_list:
        for delta in delta_grid:
            if not mu_condition(mu, eps, delta):
                rows.append(ConvergenceRow(mu, eps, delta, False, float("nan"), 0))
                continue
            L_exact, _ = limit_L(mu, eps, delta)
            iters = iterations_to_threshold(mu, eps, delta, rel_tol)
            rows.append(ConvergenceRow(mu, eps, delta, True, L_exact, iters))
    return rows


def write_convergence_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CONVERGENCE_COLUMNS)
        for r in rows:
            writer.writerow([
                _fmt(float(r.mu)), _fmt(float(r.epsilon)), _fmt(float(r.delta)),
                "" if not r.admissible else _fmt(r.L_exact),
                "" if not r.admissible else r.iters, _fmt(r.admissible)])
