"""Acceptance gate: one test per release criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`. The learnability and
ensemble-comparison criteria train real models and take several minutes.
"""

import time

import numpy as np
import pytest

from oracles import central_difference, modwt_direct, relative_error
from wavecast import autograd as ag
from wavecast import forecaster as fc
from wavecast.autograd import Tensor
from wavecast.cli import main
from wavecast.evalkit import METRIC_NAMES, MetricTable, mae, mase, mcb, rmse, smape
from wavecast.modwt import HAAR, decompose, default_level_count, imodwt, modwt
from wavecast.series import TimeSeries, fit_scaler
from wavecast.transformer import (
    TransformerConfig,
    TransformerModel,
    attention,
    causal_mask,
    in_sample_mse,
    train_model,
)


def report(criterion: int, message: str):
    print(f"PASS criterion {criterion}: {message}")


def random_corpus(count, rng):
    for _ in range(count):
        n = int(rng.integers(16, 1025))
        levels = int(rng.integers(1, default_level_count(n) + 1))
        yield rng.normal(size=n), levels


def test_criterion_1_modwt_round_trip():
    rng = np.random.default_rng(1001)
    start = time.time()
    worst = 0.0
    for y, levels in random_corpus(200, rng):
        worst = max(worst, relative_error(imodwt(decompose(y, levels=levels)), y))
    elapsed = time.time() - start
    assert worst < 1e-8
    assert elapsed < 10.0
    report(1, f"round trip max rel err {worst:.2e} over 200 series in {elapsed:.1f}s")


def test_criterion_2_energy_conservation():
    coeffs = modwt([1.0, 2.0, 3.0, 4.0], levels=1)
    detail_energy = float(np.sum(coeffs.wavelet[0] ** 2))
    smooth_energy = float(np.sum(coeffs.scaling**2))
    assert detail_energy == pytest.approx(3.0, rel=1e-12)
    assert smooth_energy == pytest.approx(27.0, rel=1e-12)
    assert detail_energy + smooth_energy == pytest.approx(30.0, rel=1e-12)

    rng = np.random.default_rng(1002)
    worst = 0.0
    for y, levels in random_corpus(200, rng):
        c = modwt(y, levels=levels)
        total = sum(np.sum(w**2) for w in c.wavelet) + np.sum(c.scaling**2)
        worst = max(worst, abs(total - np.sum(y**2)) / np.sum(y**2))
    assert worst < 1e-8
    report(2, f"energy identity max rel err {worst:.2e}; micro case 3.0 + 27.0 = 30")


def test_criterion_3_shift_equivariance():
    rng = np.random.default_rng(1003)
    for _ in range(50):
        n = int(rng.integers(16, 257))
        levels = int(rng.integers(1, default_level_count(n) + 1))
        y = rng.normal(size=n)
        base = modwt(y, levels=levels)
        for k in (1, 7, n // 2):
            shifted = modwt(np.roll(y, k), levels=levels)
            for w_b, w_s in zip(base.wavelet, shifted.wavelet):
                np.testing.assert_allclose(w_s, np.roll(w_b, k), atol=1e-10)
            np.testing.assert_allclose(shifted.scaling, np.roll(base.scaling, k), atol=1e-10)
    report(3, "coefficients commute with circular shifts k in {1, 7, N/2}, 50 series")


def test_criterion_4_equivalent_filter_oracle():
    rng = np.random.default_rng(1004)
    worst = 0.0
    for levels in (1, 2, 3, 4):
        for n in (32, 100, 256):
            y = rng.normal(size=n)
            coeffs = modwt(y, levels=levels)
            oracle_w, oracle_v = modwt_direct(
                y, HAAR.scaling_coeffs, HAAR.wavelet_coeffs, levels
            )
            for j in range(levels):
                worst = max(worst, float(np.max(np.abs(coeffs.wavelet[j] - oracle_w[j]))))
            worst = max(worst, float(np.max(np.abs(coeffs.scaling - oracle_v))))
    assert worst < 1e-10
    report(4, f"pyramid vs equivalent-filter brute force, max abs diff {worst:.2e}")


def test_criterion_5_gradient_checks():
    start = time.time()
    rng = np.random.default_rng(1005)

    # every differentiable op, 20 random points each
    constants = {
        "rhs": rng.uniform(-1, 1, (4, 3)),
        "weights": rng.uniform(-1, 1, (3, 4)),
        "w2": rng.uniform(-1, 1, (2, 6)),
        "pad": rng.uniform(-1, 1, (3, 4)),
        "wcat": rng.uniform(-1, 1, (6, 4)),
    }
    op_losses = {
        "add": lambda t: ag.mean(ag.add(t, Tensor(constants["weights"]))),
        "sub": lambda t: ag.mean(ag.sub(Tensor(constants["weights"]), t)),
        "mul": lambda t: ag.mean(ag.mul(t, Tensor(constants["weights"]))),
        "scale": lambda t: ag.mean(ag.scale(t, 3.0)),
        "matmul": lambda t: ag.mean(ag.matmul(t, Tensor(constants["rhs"]))),
        "transpose": lambda t: ag.mean(ag.mul(ag.transpose(t, (1, 0)),
                                              Tensor(constants["weights"].T))),
        "reshape": lambda t: ag.mean(ag.mul(ag.reshape(t, (2, 6)), Tensor(constants["w2"]))),
        "concat": lambda t: ag.mean(ag.mul(
            ag.concat([t, Tensor(constants["pad"])], axis=0), Tensor(constants["wcat"]))),
        "relu": lambda t: ag.mean(ag.relu(t)),
        "softmax": lambda t: ag.mean(ag.mul(ag.softmax(t, axis=-1),
                                            Tensor(constants["weights"]))),
        "layer_norm": lambda t: ag.mean(ag.mul(ag.layer_norm(t, axis=-1),
                                               Tensor(constants["weights"]))),
        "sum": lambda t: ag.scale(ag.tensor_sum(t), 0.25),
        "mean": lambda t: ag.mean(ag.mul(t, t)),
        "mse_loss": lambda t: ag.mse_loss(t, Tensor(constants["weights"])),
    }
    worst = 0.0
    for name, build in op_losses.items():
        for _ in range(20):
            x0 = rng.uniform(-1, 1, (3, 4))
            t = Tensor(x0.copy(), requires_grad=True)
            build(t).backward()
            numeric = central_difference(lambda arr: float(build(Tensor(arr)).data), x0.copy())
            err = relative_error(t.grad, numeric, floor=1e-6)
            assert err < 1e-4, name
            worst = max(worst, err)

    # full transformer forward, dropout off, 20 random parameter coordinates
    cfg = TransformerConfig(dropout=0.0)
    model = TransformerModel(cfg, seed=1005)
    window = rng.uniform(-1, 1, cfg.input_len)
    target = np.array([0.5])

    def loss_value():
        out = model.forward_batch(window[None, :], training=False)
        return float(ag.mse_loss(out, Tensor(target)).data)

    out = model.forward_batch(window[None, :], training=False)
    ag.mse_loss(out, Tensor(target)).backward()
    names = list(model.params)
    for _ in range(20):
        p = model.params[names[rng.integers(len(names))]]
        flat = p.data.ravel()
        i = int(rng.integers(flat.size))
        orig = flat[i]
        flat[i] = orig + 1e-5
        up = loss_value()
        flat[i] = orig - 1e-5
        down = loss_value()
        flat[i] = orig
        numeric = (up - down) / 2e-5
        err = relative_error(p.grad.ravel()[i], numeric, floor=1e-6)
        assert err < 1e-4
        worst = max(worst, err)

    elapsed = time.time() - start
    assert elapsed < 60.0
    report(5, f"all ops + full model vs finite differences, max rel err {worst:.2e}, "
              f"{elapsed:.1f}s")


def test_criterion_6_attention_contracts():
    rng = np.random.default_rng(1006)
    weights = ag.softmax(Tensor(rng.normal(size=(6, 6)) * 5), axis=-1).data
    np.testing.assert_allclose(weights.sum(axis=-1), 1.0, atol=1e-12)

    mask = causal_mask(6)
    masked = ag.softmax(Tensor(rng.normal(size=(6, 6))), axis=-1, mask=mask).data
    assert np.all(masked[~mask] < 1e-12)

    v = Tensor(rng.normal(size=(1, 3)))
    out = attention(Tensor(rng.normal(size=(1, 3))), Tensor(rng.normal(size=(1, 3))), v)
    np.testing.assert_array_equal(out.data, v.data)
    report(6, "rows sum to 1, masked weights < 1e-12, single-key returns V exactly")


def test_criterion_7_learnability_sine():
    start = time.time()
    t = np.arange(480)
    values = np.sin(2 * np.pi * t / 24.0)
    scaler = fit_scaler(TimeSeries(values))
    scaled = scaler.apply(values)
    model = TransformerModel(TransformerConfig(), seed=42)
    train_model(model, scaled)
    final_mse = in_sample_mse(model, scaled)
    elapsed = time.time() - start
    assert final_mse <= 1e-2
    assert elapsed < 300.0
    report(7, f"scaled one-step MSE {final_mse:.2e} after 200 epochs in {elapsed:.0f}s")


def test_criterion_8_ensemble_vs_baseline_long_horizon():
    t = np.arange(528)
    config = TransformerConfig()
    wins = 0
    details = []
    for seed in range(41, 46):
        noise = np.random.default_rng(seed).normal(0.0, 0.1, t.size)
        y = t / 100.0 + np.sin(2 * np.pi * t / 24.0) + noise
        train, test = TimeSeries(y[:480]), y[480:]
        # 3 levels keeps the period-24 cycle in few bands; deeper pyramids
        # smear it across scales and forfeit the decomposition advantage
        ensemble = fc.fit(train, config, levels=3, base_seed=seed)
        wt_rmse = rmse(test, fc.forecast(ensemble, 48).predictions)
        base_rmse = rmse(
            test, fc.fit_forecast_baseline_transformer(train, config, 48, seed=seed).predictions
        )
        wins += wt_rmse <= base_rmse
        details.append(f"seed {seed}: {wt_rmse:.3f} vs {base_rmse:.3f}")
    assert wins >= 4, details
    report(8, f"W-Transformer beats baseline on {wins}/5 seeds ({'; '.join(details)})")


def test_criterion_9_metric_golden_values():
    assert abs(rmse([0.0, 0.0], [3.0, 4.0]) - np.sqrt(12.5)) < 1e-9
    assert abs(mae([0.0, 0.0], [3.0, 4.0]) - 3.5) < 1e-9
    assert abs(smape([100.0], [50.0]) - 200.0 * 50 / 150) < 1e-9
    assert abs(smape([100.0, 200.0], [110.0, 180.0])
               - (200 * 10 / 210 + 200 * 20 / 380) / 2) < 1e-9
    assert abs(mase([2.0, 1.0], [0.0, 0.0], [1.0, 2.0, 3.0, 4.0]) - 1.5) < 1e-9

    rng = np.random.default_rng(1009)
    a = rng.normal(scale=rng.uniform(0.01, 100, 100_000), size=100_000)
    p = rng.normal(scale=rng.uniform(0.01, 100, 100_000), size=100_000)
    per_term = 200.0 * np.abs(p - a) / (np.abs(a) + np.abs(p))
    # opposite-sign pairs hit the bound exactly, modulo one rounding ulp
    assert np.all(per_term <= 200.0 + 1e-9)
    assert 0.0 <= smape(a, p) <= 200.0 + 1e-9
    report(9, "rmse/mae/sMAPE/MASE fixtures at 1e-9; sMAPE bounded by 200 over 1e5 trials")


def test_criterion_10_mcb_fixtures():
    def table_from(case_values):
        num_cases = len(next(iter(case_values.values())))
        table = MetricTable()
        for model, values in case_values.items():
            for d in range(num_cases // 4):
                table.add(f"ds{d}", "short", model,
                          dict(zip(METRIC_NAMES, values[d * 4 : d * 4 + 4])))
        return table

    dominance = mcb(table_from({"A": [1.0] * 8, "B": [2.0] * 8}))
    assert dominance.mean_ranks == {"A": 1.0, "B": 2.0}

    three = MetricTable()
    for model, (v1, v2) in {"A": (1.0, 3.0), "B": (2.0, 1.0), "C": (3.0, 2.0)}.items():
        three.add("ds", "short", model, dict(zip(METRIC_NAMES, [v1] * 4)))
        three.add("ds", "long", model, dict(zip(METRIC_NAMES, [v2] * 4)))
    assert mcb(three).mean_ranks == {"A": 2.0, "B": 1.5, "C": 2.5}

    tied = mcb(table_from({m: [3.0] * 8 for m in "ABCDE"}))
    assert all(r == 3.0 for r in tied.mean_ranks.values())

    widths = [
        mcb(table_from({"A": [1.0] * n, "B": [2.0] * n})).half_width for n in (8, 28, 56)
    ]
    assert widths[0] > widths[1] > widths[2]
    report(10, f"rank fixtures exact; interval widths shrink {widths[0]:.3f} > "
               f"{widths[1]:.3f} > {widths[2]:.3f} for n = 8, 28, 56")


def test_criterion_11_cli_determinism(tmp_path):
    data = tmp_path / "series.csv"
    t = np.arange(64)
    data.write_text("".join(f"{float(v)!r}\n" for v in np.sin(2 * np.pi * t / 8.0) + 0.01 * t))
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        code = main([
            "run", "--data", str(data), "--test-len", "8",
            "--model", "wtransformer", "--model", "transformer", "--model", "naive",
            "--levels", "2", "--epochs", "3", "--seed", "11", "--out", str(out),
        ])
        assert code == 0
        outputs.append(out)
    for model in ("wtransformer", "transformer", "naive"):
        first = (outputs[0] / f"predictions_{model}.csv").read_bytes()
        second = (outputs[1] / f"predictions_{model}.csv").read_bytes()
        assert first == second
    report(11, "two identical cmd_run invocations produced byte-identical prediction CSVs")


def test_criterion_12_level_count_rule():
    expected = {224: 4, 2137: 6, 25055: 9}
    for n, j in expected.items():
        assert default_level_count(n) == j
        assert int(np.floor(np.log(n))) == j + 1  # J+1 = floor(ln N)
    report(12, f"default level counts {expected} match floor(ln N) - 1")
