"""Learning-curve analytics over a session journal.

Fits success-vs-trial-index by maximum-likelihood logistic regression via
iteratively reweighted least squares and reports the Wald p-value for the
slope, mirroring the standard crossing-performance analysis.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..memory import Journal, trial_errors

IRLS_MAX_ITER = 50
IRLS_DEVIANCE_TOL = 1e-8
SEPARATION_COEF_NORM = 1e6


class InsufficientData(ValueError):
    """Fewer than two adjudicated trials; nothing to fit."""


@dataclass(frozen=True)
class LogisticFit:
    intercept: float
    slope: float
    slope_se: float
    p_value: float
    iterations: int
    converged: bool
    separated: bool  # perfect separation: slope is unbounded, not an estimate


@dataclass(frozen=True)
class AnalyticsReport:
    successes: tuple[int, ...]  # per-trial success indicators, trial order
    fit: LogisticFit

    @property
    def accuracy_series(self) -> tuple[float, ...]:
        """Cumulative crossing accuracy after each trial."""
        running = 0
        series = []
        for i, s in enumerate(self.successes, start=1):
            running += s
            series.append(running / i)
        return tuple(series)


def _deviance(y: np.ndarray, p: np.ndarray) -> float:
    eps = 1e-12
    return -2.0 * float(np.sum(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps)))


def fit_logistic(successes: Sequence[int]) -> LogisticFit:
    """IRLS fit of P(success) = sigmoid(intercept + slope * trial_index).

    Perfect separation (or an all-same outcome column) is detected via the
    coefficient norm and reported as a flag instead of an estimate.
    """
    if len(successes) < 2:
        raise InsufficientData(f"need at least 2 trials, got {len(successes)}")
    y = np.asarray(successes, dtype=float)
    n = len(y)
    x = np.column_stack([np.ones(n), np.arange(n, dtype=float)])
    beta = np.zeros(2)
    deviance = math.inf
    converged = False
    separated = False
    iterations = 0

    for iterations in range(1, IRLS_MAX_ITER + 1):
        eta = np.clip(x @ beta, -30.0, 30.0)
        p = 1.0 / (1.0 + np.exp(-eta))
        w = p * (1.0 - p)
        w = np.maximum(w, 1e-10)
        z = eta + (y - p) / w
        xtw = x.T * w
        try:
            beta = np.linalg.solve(xtw @ x, xtw @ z)
        except np.linalg.LinAlgError:
            separated = True
            break
        if float(np.linalg.norm(beta)) > SEPARATION_COEF_NORM:
            separated = True
            break
        new_deviance = _deviance(y, 1.0 / (1.0 + np.exp(-np.clip(x @ beta, -30.0, 30.0))))
        if abs(deviance - new_deviance) < IRLS_DEVIANCE_TOL:
            converged = True
            deviance = new_deviance
            break
        deviance = new_deviance

    p_all_same = bool(np.all(y == y[0]))
    if p_all_same:
        separated = True

    if separated:
        return LogisticFit(
            intercept=float(beta[0]),
            slope=float(beta[1]),
            slope_se=math.nan,
            p_value=math.nan,
            iterations=iterations,
            converged=False,
            separated=True,
        )

    eta = np.clip(x @ beta, -30.0, 30.0)
    p = 1.0 / (1.0 + np.exp(-eta))
    w = np.maximum(p * (1.0 - p), 1e-10)
    covariance = np.linalg.inv((x.T * w) @ x)
    slope_se = float(math.sqrt(covariance[1, 1]))
    wald_z = float(beta[1]) / slope_se if slope_se > 0 else math.inf
    p_value = math.erfc(abs(wald_z) / math.sqrt(2.0))
    return LogisticFit(
        intercept=float(beta[0]),
        slope=float(beta[1]),
        slope_se=slope_se,
        p_value=p_value,
        iterations=iterations,
        converged=converged,
        separated=False,
    )


def trial_successes(journal: Journal) -> list[int]:
    return [0 if err else 1 for err in trial_errors(journal)]


def export_analytics(journal: Journal) -> AnalyticsReport:
    successes = trial_successes(journal)
    if len(successes) < 2:
        raise InsufficientData(f"need at least 2 adjudicated trials, got {len(successes)}")
    return AnalyticsReport(successes=tuple(successes), fit=fit_logistic(successes))


def write_csv(report: AnalyticsReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial_index", "success", "cumulative_accuracy"])
        for i, (s, acc) in enumerate(zip(report.successes, report.accuracy_series)):
            writer.writerow([i, s, f"{acc:.6f}"])
