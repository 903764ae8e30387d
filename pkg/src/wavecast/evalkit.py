"""Forecast accuracy metrics and the multiple-comparisons-with-the-best
(MCB) average-rank analysis.

sMAPE uses the 0-200 convention. MASE scales by the in-sample lag-m naive
MAE (m defaults to 1). MCB ranks models within each (dataset, horizon,
metric) case, averages the ranks, and draws Tukey-style simultaneous
intervals around the rank means.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

METRIC_NAMES = ("rmse", "mae", "smape", "mase")

# Studentized-range quantiles q_alpha(k, df=inf), k = 2..20.
_STUDENTIZED_RANGE_Q = {
    0.01: [3.642773, 4.120303, 4.402801, 4.602821, 4.757047, 4.882166, 4.987183,
           5.077506, 5.156635, 5.226963, 5.290196, 5.347592, 5.400105, 5.448476,
           5.493291, 5.535020, 5.574047, 5.610690, 5.645215],
    0.05: [2.771808, 3.314493, 3.633160, 3.857656, 4.030092, 4.169554, 4.286309,
           4.386509, 4.474124, 4.551864, 4.621655, 4.684920, 4.742732, 4.795924,
           4.845154, 4.890951, 4.933745, 4.973892, 5.011689],
    0.10: [2.326174, 2.902380, 3.240446, 3.478281, 3.660721, 3.808098, 3.931349,
           4.037023, 4.129346, 4.211200, 4.284635, 4.351158, 4.411913, 4.467782,
           4.519464, 4.567519, 4.612403, 4.654494, 4.694104],
}


def _paired(actual, pred) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(pred, dtype=np.float64)
    if a.shape != p.shape or a.ndim != 1:
        raise ValueError("actual and predicted must be 1-D and equal length")
    if a.size == 0:
        raise ValueError("empty input")
    return a, p


def rmse(actual, pred) -> float:
    a, p = _paired(actual, pred)
    return float(np.sqrt(np.mean((a - p) ** 2)))


def mae(actual, pred) -> float:
    a, p = _paired(actual, pred)
    return float(np.mean(np.abs(a - p)))


def smape(actual, pred) -> float:
    """Symmetric MAPE on the 0-200 scale; both-zero terms contribute 0."""
    a, p = _paired(actual, pred)
    denom = np.abs(a) + np.abs(p)
    terms = np.where(denom == 0.0, 0.0, np.abs(p - a) / np.where(denom == 0.0, 1.0, denom))
    return float(200.0 * np.mean(terms))


def mase(actual, pred, insample, seasonal_period: int = 1) -> float:
    """Forecast MAE scaled by the in-sample seasonal-naive MAE."""
    a, p = _paired(actual, pred)
    hist = np.asarray(insample, dtype=np.float64)
    m = seasonal_period
    if hist.size < m + 1:
        raise ValueError("in-sample series too short for the scaling term")
    scaling = np.mean(np.abs(hist[m:] - hist[:-m]))
    if scaling == 0.0:
        raise ValueError("MASE undefined: in-sample naive MAE is zero")
    return float(np.mean(np.abs(a - p)) / scaling)


def all_metrics(actual, pred, insample, seasonal_period: int = 1) -> dict[str, float]:
    return {
        "rmse": rmse(actual, pred),
        "mae": mae(actual, pred),
        "smape": smape(actual, pred),
        "mase": mase(actual, pred, insample, seasonal_period),
    }


@dataclass
class MetricTable:
    """rows: (dataset, horizon_tag, model_tag) -> {metric: value}."""

    rows: dict = field(default_factory=dict)

    def add(self, dataset: str, horizon_tag: str, model_tag: str, metrics: dict):
        self.rows[(dataset, horizon_tag, model_tag)] = dict(metrics)

    def models(self) -> list[str]:
        return sorted({key[2] for key in self.rows})

    def cases(self) -> list[tuple]:
        """(dataset, horizon, metric) triples present in the table."""
        pairs = sorted({(d, h) for d, h, _ in self.rows})
        return [(d, h, metric) for d, h in pairs for metric in METRIC_NAMES]


@dataclass(frozen=True)
class McbResult:
    mean_ranks: dict  # model tag -> mean rank
    half_width: float
    best: str
    n_cases: int
    alpha: float

    def not_significantly_worse(self) -> list[str]:
        """Models whose interval overlaps the best model's interval."""
        best_upper = self.mean_ranks[self.best] + self.half_width
        return sorted(
            tag for tag, r in self.mean_ranks.items() if r - self.half_width <= best_upper
        )


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ascending mid-ranks; non-finite entries share the worst rank."""
    clean = np.where(np.isfinite(values), values, np.inf)
    order = np.argsort(clean, kind="stable")
    ranks = np.empty(values.size)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and clean[order[j + 1]] == clean[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def studentized_range_quantile(k: int, alpha: float) -> float:
    if alpha not in _STUDENTIZED_RANGE_Q:
        raise ValueError(f"no tabulated quantiles for alpha={alpha}; use 0.01, 0.05 or 0.10")
    if not 2 <= k <= 20:
        raise ValueError("tabulated quantiles cover 2 to 20 models")
    return _STUDENTIZED_RANGE_Q[alpha][k - 2]


def mcb(table: MetricTable, alpha: float = 0.05) -> McbResult:
    """Average ranks over all (dataset, horizon, metric) cases with Tukey
    simultaneous interval half-widths."""
    models = table.models()
    k = len(models)
    if k < 2:
        raise ValueError("MCB needs at least 2 models")
    cases = table.cases()
    n_cases = len(cases)

    rank_sums = np.zeros(k)
    for dataset, horizon, metric in cases:
        values = np.empty(k)
        for i, model in enumerate(models):
            try:
                values[i] = table.rows[(dataset, horizon, model)][metric]
            except KeyError:
                raise ValueError(
                    f"missing cell: model={model} dataset={dataset} "
                    f"horizon={horizon} metric={metric}"
                ) from None
        rank_sums += _average_ranks(values)

    mean_ranks = {model: rank_sums[i] / n_cases for i, model in enumerate(models)}
    q = studentized_range_quantile(k, alpha)
    half_width = 0.5 * q * np.sqrt(k * (k + 1) / (6.0 * n_cases))
    best = min(mean_ranks, key=mean_ranks.get)
    return McbResult(
        mean_ranks=mean_ranks, half_width=float(half_width), best=best,
        n_cases=n_cases, alpha=alpha,
    )
