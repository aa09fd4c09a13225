"""Monte Carlo driver: sweeps over Hurst-distribution configurations,
replicates the full pipeline, and scores identification proportions,
selected thresholds, and mode/probability errors against the truth.

Per-replication seeds derive from (master seed, config index, rep index),
so any single replication can be reproduced in isolation and the
aggregates are independent of evaluation order.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateSpectrumError
from .gmm import select_gmm
from .scaling import heuristic_m, log_eigen, log_eigen_multiscale, wavelet_random_matrix
from .selection import EstimationResult, select_scheme
from .synth import HurstDistribution, MixingMatrix, gen_panel, subseed
from .wavelet import daubechies, decompose

__all__ = [
    "ExperimentSpec",
    "PipelineConfig",
    "RepRecord",
    "SweepResult",
    "run_pipeline",
    "run_rep",
    "run_sweep",
]


@dataclass(frozen=True)
class PipelineConfig:
    """Analysis parameters shared by every replication of a sweep.

    Single-scale mode analyzes the matrix at octave j + log2(a) and rescales
    by a; multiscale mode regresses across octaves j1..j2.  grid_max None
    means the data-driven choice (fixed-octave heuristic when single-scale,
    statistic spread when multiscale).
    """

    n: int = 0  # panel geometry; 0 when the panel comes from elsewhere (CLI)
    p: int = 0
    a: int = 16
    j: int = 1
    multiscale: tuple[int, int] | None = None
    m: int = 10
    grid_max: float | None = None
    min_cluster: int = 2
    n_vanishing: int = 2

    def __post_init__(self):
        if self.multiscale is None:
            if self.a < 2 or (self.a & (self.a - 1)) != 0:
                raise ConfigError(f"scale factor a must be a power of two >= 2, got {self.a}")
            if self.j < 0:
                raise ConfigError(f"octave j must be >= 0, got {self.j}")
        else:
            j1, j2 = self.multiscale
            if not 1 <= j1 < j2:
                raise ConfigError(f"need 1 <= j1 < j2, got ({j1}, {j2})")

    @property
    def total_octave(self) -> int:
        if self.multiscale is not None:
            return self.multiscale[1]
        return self.j + int(math.log2(self.a))


def log_eigen_set(panel, config: PipelineConfig):
    """Decompose a panel and return (log-eigenvalue set, auto grid_max)."""
    bank = daubechies(config.n_vanishing)
    decomp = decompose(panel, bank, config.total_octave)
    if config.multiscale is not None:
        h_set = log_eigen_multiscale(decomp, *config.multiscale)
        auto_m = float(h_set.values[-1] - h_set.values[0])
    else:
        wrm = wavelet_random_matrix(decomp, config.total_octave)
        h_set = log_eigen(wrm, config.a)
        auto_m = heuristic_m(decomp, config.j, config.a)
    return h_set, auto_m


def run_pipeline(panel, config: PipelineConfig, seed: int = 0) -> EstimationResult:
    """Panel through decomposition, log-eigenvalues, and threshold selection."""
    h_set, auto_m = log_eigen_set(panel, config)
    grid_max = config.grid_max if config.grid_max is not None else auto_m
    if grid_max <= 0.0:
        grid_max = None  # degenerate flat spectrum; fall back to spread rule
    return select_scheme(
        h_set, m=config.m, grid_max=grid_max, seed=seed, min_cluster=config.min_cluster
    )


@dataclass(frozen=True)
class RepRecord:
    """Score card of one replication (one method)."""

    method: str
    r_hat: int
    correct: bool
    epsilon_ms: float | None
    mode_err: float | None  # max |mode_i - true_i|, only when r_hat = r
    prob_err: float | None
    modes: tuple[float, ...]
    probs: tuple[float, ...]


def _score(method, r_hat, modes, probs, dist: HurstDistribution, epsilon_ms=None) -> RepRecord:
    correct = r_hat == dist.r
    mode_err = prob_err = None
    if correct:
        mode_err = float(np.max(np.abs(np.asarray(modes) - np.asarray(dist.modes))))
        prob_err = float(np.max(np.abs(np.asarray(probs) - np.asarray(dist.probs))))
    return RepRecord(
        method, int(r_hat), correct, epsilon_ms, mode_err, prob_err,
        tuple(float(v) for v in modes), tuple(float(v) for v in probs),
    )


@dataclass(frozen=True)
class ExperimentSpec:
    """A sweep: one pipeline configuration evaluated over several laws."""

    configs: tuple[tuple[str, HurstDistribution], ...]
    pipeline: PipelineConfig
    reps: int = 200
    methods: tuple[str, ...] = ("spectral", "gmm")
    master_seed: int = 0
    fixed_mix: bool = False  # one mixing matrix for all reps instead of redrawing
    gmm_k_max: int = 3

    def __post_init__(self):
        for method in self.methods:
            if method not in ("spectral", "gmm"):
                raise ConfigError(f"unknown method {method!r}")
        cfg = self.pipeline
        scale = cfg.a * 2**cfg.j if cfg.multiscale is None else 2 ** cfg.multiscale[1]
        if cfg.p >= cfg.n / scale:
            warnings.warn(
                f"p={cfg.p} is not below n/scale = {cfg.n / scale:.1f}; the moderately "
                "high-dimensional regime assumes p < n/(a 2^j)",
                RuntimeWarning,
            )

    @classmethod
    def bimodal_sweep(cls, deltas, base: float = 0.25, probs=(0.5, 0.5), **kwargs) -> "ExperimentSpec":
        configs = []
        for d in deltas:
            if d == 0.0:
                dist = HurstDistribution.point(base)
            else:
                dist = HurstDistribution((base, base + d), tuple(probs))
            configs.append((f"delta={d:g}", dist))
        return cls(configs=tuple(configs), **kwargs)


def run_rep(spec: ExperimentSpec, config_index: int, rep_index: int) -> dict:
    """One replication, reproducible in isolation from its (config, rep) address."""
    label, dist = spec.configs[config_index]
    cfg = spec.pipeline
    rep_seed = int(subseed(spec.master_seed, 5, config_index, rep_index).integers(2**63))
    mix_seed = spec.master_seed if spec.fixed_mix else rep_seed
    mix = MixingMatrix.haar(cfg.p, mix_seed)
    panel, _true_h = gen_panel(dist, cfg.p, cfg.n, mix=mix, seed=rep_seed)

    records: list[RepRecord] = []
    failure = None
    try:
        h_set, auto_m = log_eigen_set(panel, cfg)
        if "spectral" in spec.methods:
            grid_max = cfg.grid_max if cfg.grid_max is not None else (auto_m if auto_m > 0 else None)
            est = select_scheme(h_set, m=cfg.m, grid_max=grid_max, seed=rep_seed,
                                min_cluster=cfg.min_cluster)
            records.append(_score("spectral", est.r_hat, est.modes, est.probs, dist, est.epsilon_ms))
        if "gmm" in spec.methods:
            fit = select_gmm(h_set, k_max=spec.gmm_k_max, seed=rep_seed)
            records.append(_score("gmm", fit.k, fit.means, fit.weights, dist))
    except DegenerateSpectrumError as exc:
        failure = str(exc)
    return {"config": label, "rep": rep_index, "records": records, "failure": failure}


@dataclass
class SweepResult:
    """Aggregates per (config, method) plus the per-rep records."""

    rows: list[dict] = field(default_factory=list)
    rep_records: list[dict] = field(default_factory=list)

    def proportion(self, config_label: str, method: str) -> float:
        for row in self.rows:
            if row["config"] == config_label and row["method"] == method:
                return row["proportion_correct"]
        raise KeyError((config_label, method))


def run_sweep(spec: ExperimentSpec, workers: int = 1, keep_records: bool = True) -> SweepResult:
    """All replications of all configs; failures are counted and excluded,
    never silently dropped.  The result is independent of worker count."""
    jobs = [(ci, ri) for ci in range(len(spec.configs)) for ri in range(spec.reps)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda job: run_rep(spec, *job), jobs))
    else:
        outcomes = [run_rep(spec, *job) for job in jobs]

    result = SweepResult()
    if keep_records:
        result.rep_records = outcomes
    for ci, (label, dist) in enumerate(spec.configs):
        these = [o for o in outcomes if o["config"] == label]
        failures = sum(1 for o in these if o["failure"] is not None)
        for method in spec.methods:
            recs = [r for o in these for r in o["records"] if r.method == method]
            used = len(recs)
            correct = [r for r in recs if r.correct]
            row = {
                "config": label,
                "method": method,
                "true_r": dist.r,
                "reps": spec.reps,
                "reps_used": used,
                "failures": failures,
                "proportion_correct": (len(correct) / used) if used else float("nan"),
                "mean_epsilon_ms": _mean([r.epsilon_ms for r in recs if r.epsilon_ms is not None]),
                "mode_rmse": _rmse([r.mode_err for r in correct]),
                "prob_rmse": _rmse([r.prob_err for r in correct]),
            }
            result.rows.append(row)
    return result


def _mean(xs):
    return float(np.mean(xs)) if xs else None


def _rmse(xs):
    xs = [x for x in xs if x is not None]
    return float(np.sqrt(np.mean(np.square(xs)))) if xs else None
