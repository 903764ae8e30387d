"""Wavelet-decomposed transformer ensembles for univariate forecasting."""

__version__ = "0.1.0"

from . import evalkit, forecaster, modwt, series, transformer  # noqa: F401
from .series import AffineScaler, Frequency, SplitSpec, TimeSeries, fit_scaler, load_csv, split
from .modwt import (
    HAAR,
    WaveletDecomposition,
    WaveletFilter,
    decompose,
    default_level_count,
    imodwt,
    mra,
)
from .transformer import TransformerConfig, TransformerModel, predict_recursive, train_model
from .forecaster import ForecastResult, WTransformerEnsemble, naive_forecast
from .evalkit import MetricTable, McbResult, all_metrics, mae, mase, mcb, rmse, smape

__all__ = [
    "AffineScaler", "Frequency", "SplitSpec", "TimeSeries", "fit_scaler", "load_csv", "split",
    "HAAR", "WaveletDecomposition", "WaveletFilter", "decompose", "default_level_count",
    "imodwt", "mra",
    "TransformerConfig", "TransformerModel", "predict_recursive", "train_model",
    "ForecastResult", "WTransformerEnsemble", "naive_forecast",
    "MetricTable", "McbResult", "all_metrics", "mae", "mase", "mcb", "rmse", "smape",
]
