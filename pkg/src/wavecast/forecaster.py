"""End-to-end forecasting: decompose the training series, train one
transformer per band, forecast each band recursively, recombine additively.

Also provides the no-decomposition transformer baseline (structurally a J=0
ensemble) and the naive last-value forecast used as the MASE reference.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import modwt
from .series import AffineScaler, TimeSeries, fit_scaler
from .transformer import TransformerConfig, TransformerModel, predict_recursive, train_model


@dataclass(frozen=True)
class ForecastResult:
    predictions: np.ndarray  # [h], raw units
    per_band_predictions: np.ndarray  # [num_bands, h], raw units
    horizon: int
    model_tag: str


@dataclass
class WTransformerEnsemble:
    """One trained transformer per decomposition band (details first, smooth
    last).

    Band histories are the raw Haar MODWT coefficient series, not the MRA
    re-expansion: the Haar pyramid satisfies V_{j-1} = V_j + W_j, so the raw
    series already sum elementwise to the input. Unlike the MRA bands,
    whose synthesis pass wraps the end of the series into its start, they
    are also causal, so the recent history each model extrapolates from is
    free of circular-boundary artifacts.

    ``levels == 0`` is the degenerate no-decomposition case: a single band
    equal to the raw training series, i.e. the plain transformer baseline.
    """

    config: TransformerConfig
    base_seed: int
    levels: int
    bands: list  # band training histories, raw units
    scalers: list[AffineScaler]
    models: list[TransformerModel]
    decomposition: modwt.ModwtCoefficients | None
    loss_traces: list[list[float]] = field(default_factory=list)

    @property
    def num_bands(self) -> int:
        return len(self.bands)

    def band_tags(self) -> list[str]:
        if self.levels == 0:
            return ["raw"]
        return [f"D{j}" for j in range(1, self.levels + 1)] + [f"S{self.levels}"]


def _train_band(band: np.ndarray, config: TransformerConfig, seed: int):
    scaler = fit_scaler(band)
    model = TransformerModel(config, seed=seed)
    trace = train_model(model, scaler.apply(band))
    return scaler, model, trace


def fit(
    train: TimeSeries,
    config: TransformerConfig = TransformerConfig(),
    levels: int | None = None,
    base_seed: int = 42,
    full_series: TimeSeries | None = None,
    jobs: int = 1,
) -> WTransformerEnsemble:
    """Decompose, then train one model per band on its scaled band history.

    By default the decomposition sees only the training split, so no test
    information can reach the models through the circular convolutions.
    Passing ``full_series`` decomposes train+test jointly and trains on the
    first len(train) values of each band (the literal, leaky protocol); use
    only for comparison.
    """
    n_train = train.n
    if n_train < config.input_len + 1:
        raise ValueError(
            f"training series of length {n_train} is too short for input_len {config.input_len}"
        )

    if levels == 0:
        decomposition = None
        bands = [np.asarray(train.values)]
    else:
        source = train if full_series is None else full_series
        decomposition = modwt.modwt(source.values, levels=levels)
        bands = [band[:n_train] for band in [*decomposition.wavelet, decomposition.scaling]]

    seeds = [base_seed + i for i in range(len(bands))]
    if jobs > 1 and len(bands) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_train_band, bands, [config] * len(bands), seeds))
    else:
        results = [_train_band(band, config, seed) for band, seed in zip(bands, seeds)]

    return WTransformerEnsemble(
        config=config,
        base_seed=base_seed,
        levels=0 if levels == 0 else (decomposition.levels if decomposition else 0),
        bands=bands,
        scalers=[r[0] for r in results],
        models=[r[1] for r in results],
        decomposition=decomposition,
        loss_traces=[r[2] for r in results],
    )


def forecast(ensemble: WTransformerEnsemble, horizon: int, tag: str = "wtransformer") -> ForecastResult:
    """Recursive per-band forecasts, un-scaled and summed across bands."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    per_band = np.empty((ensemble.num_bands, horizon))
    for i, (band, scaler, model) in enumerate(
        zip(ensemble.bands, ensemble.scalers, ensemble.models)
    ):
        scaled = predict_recursive(model, scaler.apply(band), horizon)
        per_band[i] = scaler.invert(scaled)
    return ForecastResult(
        predictions=per_band.sum(axis=0),
        per_band_predictions=per_band,
        horizon=horizon,
        model_tag=tag,
    )


def fit_forecast_baseline_transformer(
    train: TimeSeries,
    config: TransformerConfig,
    horizon: int,
    seed: int = 42,
) -> ForecastResult:
    """Single transformer on the raw (scaled) series: the J=0 ensemble."""
    ensemble = fit(train, config, levels=0, base_seed=seed)
    result = forecast(ensemble, horizon, tag="transformer")
    return result


def naive_forecast(train: TimeSeries, horizon: int) -> ForecastResult:
    """Repeat the last training value."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if train.n < 2:
        raise ValueError("naive forecast needs at least 2 training values")
    preds = np.full(horizon, float(train.values[-1]))
    return ForecastResult(
        predictions=preds,
        per_band_predictions=preds[None, :],
        horizon=horizon,
        model_tag="naive",
    )
