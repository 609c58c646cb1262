"""Replicated simulation study: MSE(k) curves and correct-selection rates c(k)."""
from __future__ import annotations

import hashlib
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import Series
from .estimate import (
    block_length_for,
    intervals_estimator,
    sliding_blocks_mle,
    theta_hat_auto,
)
from .simulate import ModelSpec, simulate

log = logging.getLogger(__name__)

ESTIMATORS = ("auto", "sliding_blocks", "intervals")
DEFAULT_K_GRID = tuple(range(30, 301, 10))


def replicate_seed(base_seed: int, model: ModelSpec, r: int) -> int:
    """base_seed XOR a stable 64-bit hash of (model, replicate)."""
    digest = hashlib.blake2b(f"{model.label}/{r}".encode(), digest_size=8).digest()
    return (int(base_seed) ^ int.from_bytes(digest, "little")) & 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class StudyConfig:
    models: tuple[ModelSpec, ...]
    n: int = 5000
    reps: int = 1000
    k_grid: tuple[int, ...] = DEFAULT_K_GRID
    d_u: int = 10
    estimators: tuple[str, ...] = ESTIMATORS
    base_seed: int = 0
    keep_raw: bool = False

    def __post_init__(self):
        from .core import ParameterError

        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "k_grid", tuple(int(k) for k in self.k_grid))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if not self.models:
            raise ParameterError("at least one model is required")
        if not self.k_grid or min(self.k_grid) < 1:
            raise ParameterError("k_grid must hold positive integers")
        if self.n < max(self.k_grid) + self.d_u + 2:
            raise ParameterError(f"n={self.n} must be >= max(k_grid) + d_u + 2")
        if self.reps < 1:
            raise ParameterError("reps must be >= 1")
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad:
            raise ParameterError(f"unknown estimators {sorted(bad)}; choose from {ESTIMATORS}")


@dataclass
class ReplicateResult:
    model: str
    rep: int
    seed: int
    theta: dict[str, list[float]]  # estimator -> value per k (nan when failed)
    d_hat: list[int]
    failures: list[tuple[str, int, str]] = field(default_factory=list)


def run_replicate(config: StudyConfig, model: ModelSpec, r: int) -> ReplicateResult:
    seed = replicate_seed(config.base_seed, model, r)
    series: Series = simulate(model, config.n, seed).series
    theta = {e: [] for e in config.estimators}
    d_hat: list[int] = []
    failures = []
    for k in config.k_grid:
        for name in config.estimators:
            try:
                if name == "auto":
                    est, sel = theta_hat_auto(series, k, config.d_u, segmented=False)
                    d_hat.append(sel.d_star_hat)
                    value = est.theta_hat
                elif name == "intervals":
                    value = intervals_estimator(series, k).theta_hat
                else:
                    value = sliding_blocks_mle(series, block_length_for(config.n, k)).theta_hat
            except ValueError as exc:
                failures.append((name, k, str(exc)))
                value = math.nan
                if name == "auto":
                    d_hat.append(-1)
            if not math.isfinite(value):
                value = math.nan
            theta[name].append(value)
    return ReplicateResult(model.label, r, seed, theta, d_hat, failures)


def _run_chunk(args):
    config, model, reps = args
    return [run_replicate(config, model, r) for r in reps]


@dataclass
class McReport:
    config: StudyConfig
    cells: list[dict]  # one per (model, estimator, k)
    selection: list[dict]  # one per (model, k)
    raw: list[ReplicateResult] | None = None

    def cell(self, model: str, estimator: str, k: int) -> dict:
        for c in self.cells:
            if c["model"] == model and c["estimator"] == estimator and c["k"] == k:
                return c
        raise KeyError((model, estimator, k))

    def c_k(self, model: str, k: int) -> float | None:
        for c in self.selection:
            if c["model"] == model and c["k"] == k:
                return c["c_k"]
        raise KeyError((model, k))

    def min_mse(self, model: str, estimator: str) -> float:
        vals = [c["mse"] for c in self.cells
                if c["model"] == model and c["estimator"] == estimator and c["mse"] is not None]
        return min(vals)

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg["models"] = [m.label for m in self.config.models]
        return {"config": cfg, "cells": self.cells, "selection": self.selection}


def _aggregate(values: np.ndarray, truth: float | None) -> dict:
    ok = values[~np.isnan(values)]
    out = {"n_valid": int(ok.size), "n_excluded": int(values.size - ok.size)}
    if ok.size == 0:
        return {**out, "mean_theta": None, "mse": None, "bias": None, "variance": None}
    mean = float(ok.mean())
    variance = float(np.mean((ok - mean) ** 2))
    out["mean_theta"] = mean
    if truth is None:
        return {**out, "mse": None, "bias": None, "variance": variance}
    return {**out, "mse": float(np.mean((ok - truth) ** 2)), "bias": mean - truth, "variance": variance}


def build_report(config: StudyConfig, results: list[ReplicateResult]) -> McReport:
    cells, selection = [], []
    for model in config.models:
        rows = sorted((r for r in results if r.model == model.label), key=lambda r: r.rep)
        for name in config.estimators:
            mat = np.array([r.theta[name] for r in rows], dtype=float)
            for j, k in enumerate(config.k_grid):
                agg = _aggregate(mat[:, j], model.true_theta)
                reasons = sorted({f[2] for r in rows for f in r.failures if f[0] == name and f[1] == k})
                cells.append({"model": model.label, "estimator": name, "k": k, **agg,
                              "exclusion_reasons": reasons})
        if "auto" in config.estimators:
            D = np.array([r.d_hat for r in rows], dtype=int)
            for j, k in enumerate(config.k_grid):
                col = D[:, j]
                valid = col[col > 0]
                c_k = None
                if model.true_d_star is not None and valid.size:
                    c_k = float(np.mean(valid == model.true_d_star))
                counts = {str(v): int(c) for v, c in zip(*np.unique(valid, return_counts=True))}
                selection.append({"model": model.label, "k": k, "c_k": c_k,
                                  "true_d_star": model.true_d_star, "d_hat_counts": counts})
    return McReport(config, cells, selection, results if config.keep_raw else None)


def run_study(config: StudyConfig, jobs: int = 1) -> McReport:
    """Run every replicate of every model; the report does not depend on ``jobs``."""
    tasks = []
    chunk = max(1, math.ceil(config.reps / max(1, jobs) / 4))
    for model in config.models:
        for start in range(0, config.reps, chunk):
            tasks.append((config, model, range(start, min(config.reps, start + chunk))))
    results: list[ReplicateResult] = []
    if jobs <= 1:
        for t in tasks:
            results.extend(_run_chunk(t))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_run_chunk, tasks):
                results.extend(part)
    log.info("study finished: %d replicates", len(results))
    return build_report(config, results)


def mse_curves(report: McReport) -> dict[str, list[dict]]:
    """Plot-ready MSE(k) tables: model label -> rows {k, <estimator>: mse, ...}."""
    out: dict[str, list[dict]] = {}
    for model in report.config.models:
        rows = []
        for k in report.config.k_grid:
            row = {"k": k}
            for name in report.config.estimators:
                row[name] = report.cell(model.label, name, k)["mse"]
            rows.append(row)
        out[model.label] = rows
    return out
