"""One-step sequence forecaster: encoder stack, masked decoder stage, and a
cross-attending decoder stage, with a linear output head.

The encoder reads the embedded input window plus sinusoidal positions; the
decoder is seeded with the embedded last window value (a single token), passes
through masked self-attention, then cross-attends to the encoder output. The
head maps the decoder token to one real value, so multi-step forecasts are
produced recursively.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from . import autograd as ag
from .autograd import Tensor


@dataclass(frozen=True)
class TransformerConfig:
    input_len: int = 12
    output_len: int = 1
    d_model: int = 16
    num_heads: int = 8
    encoder_layers: int = 2
    decoder_layers: int = 2
    ffn_hidden: int = 64
    dropout: float = 0.1
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    activation: str = "relu"

    def __post_init__(self):
        if self.d_model % self.num_heads != 0:
            raise ValueError("d_model must be divisible by num_heads")
        if self.input_len < 1:
            raise ValueError("input_len must be at least 1")
        if self.output_len != 1:
            raise ValueError("recursive forecasting requires a one-step head")
        if self.activation != "relu":
            raise ValueError(f"unsupported activation: {self.activation}")

    @property
    def head_dim(self) -> int:
        return self.d_model // self.num_heads


def sinusoidal_positions(max_len: int, d_model: int) -> np.ndarray:
    """Fixed sin/cos positional table."""
    position = np.arange(max_len)[:, None]
    div = np.exp(np.arange(0, d_model, 2) * (-math.log(10000.0) / d_model))
    table = np.zeros((max_len, d_model))
    table[:, 0::2] = np.sin(position * div)
    table[:, 1::2] = np.cos(position * div)
    return table


def attention(q, k, v, mask: np.ndarray | None = None) -> Tensor:
    """softmax(Q K^T / sqrt(d)) V over the last two axes; mask is boolean
    [len_q, len_k], False = blocked."""
    q, k, v = ag._as_tensor(q), ag._as_tensor(k), ag._as_tensor(v)
    d = q.shape[-1]
    if k.shape[-1] != d or k.shape[-2] != v.shape[-2]:
        raise ValueError("incompatible attention dimensions")
    scores = ag.scale(ag.matmul(q, ag.transpose(k, axes=_swap_last(k))), 1.0 / math.sqrt(d))
    weights = ag.softmax(scores, axis=-1, mask=mask)
    return ag.matmul(weights, v)


def _swap_last(t: Tensor) -> tuple:
    axes = list(range(t.data.ndim))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return tuple(axes)


def causal_mask(length: int) -> np.ndarray:
    return np.tril(np.ones((length, length), dtype=bool))


class TransformerModel:
    """Parameter set for one band's forecaster; owns its seeded RNG."""

    def __init__(self, config: TransformerConfig, seed: int = 42):
        self.config = config
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.params: dict[str, Tensor] = {}
        self._positions = sinusoidal_positions(max(config.input_len, 2), config.d_model)
        self._build()

    def _weight(self, name: str, fan_in: int, shape: tuple) -> Tensor:
        bound = 1.0 / math.sqrt(fan_in)
        t = Tensor(self.rng.uniform(-bound, bound, size=shape), requires_grad=True)
        self.params[name] = t
        return t

    def _attn_block(self, prefix: str):
        dm = self.config.d_model
        for mat in ("wq", "wk", "wv", "wo"):
            self._weight(f"{prefix}.{mat}", dm, (dm, dm))

    def _norm_block(self, prefix: str):
        dm = self.config.d_model
        self.params[f"{prefix}.gain"] = Tensor(np.ones(dm), requires_grad=True)
        self.params[f"{prefix}.bias"] = Tensor(np.zeros(dm), requires_grad=True)

    def _ffn_block(self, prefix: str):
        dm, hidden = self.config.d_model, self.config.ffn_hidden
        self._weight(f"{prefix}.w1", dm, (dm, hidden))
        self.params[f"{prefix}.b1"] = Tensor(np.zeros(hidden), requires_grad=True)
        self._weight(f"{prefix}.w2", hidden, (hidden, dm))
        self.params[f"{prefix}.b2"] = Tensor(np.zeros(dm), requires_grad=True)

    def _build(self):
        cfg = self.config
        self._weight("embed_in.w", 1, (1, cfg.d_model))
        self.params["embed_in.b"] = Tensor(np.zeros(cfg.d_model), requires_grad=True)
        self._weight("embed_out.w", 1, (1, cfg.d_model))
        self.params["embed_out.b"] = Tensor(np.zeros(cfg.d_model), requires_grad=True)
        for i in range(cfg.encoder_layers):
            self._attn_block(f"enc{i}.attn")
            self._norm_block(f"enc{i}.ln1")
            self._ffn_block(f"enc{i}.ffn")
            self._norm_block(f"enc{i}.ln2")
        for i in range(cfg.decoder_layers):
            self._attn_block(f"dec{i}.self_attn")
            self._norm_block(f"dec{i}.ln0")
            self._attn_block(f"dec{i}.cross_attn")
            self._norm_block(f"dec{i}.ln1")
            self._ffn_block(f"dec{i}.ffn")
            self._norm_block(f"dec{i}.ln2")
        self._weight("head.w", cfg.d_model, (cfg.d_model, 1))
        self.params["head.b"] = Tensor(np.zeros(1), requires_grad=True)

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def parameter_count(self) -> int:
        return sum(p.data.size for p in self.parameters())

    # forward pieces -------------------------------------------------------

    def _multi_head(self, prefix: str, x_q: Tensor, x_kv: Tensor, mask) -> Tensor:
        cfg = self.config
        p = self.params
        batch = x_q.shape[0]
        len_q, len_k = x_q.shape[1], x_kv.shape[1]

        def heads(x: Tensor, w: Tensor, length: int) -> Tensor:
            proj = ag.matmul(x, w)
            proj = ag.reshape(proj, (batch, length, cfg.num_heads, cfg.head_dim))
            return ag.transpose(proj, (0, 2, 1, 3))

        q = heads(x_q, p[f"{prefix}.wq"], len_q)
        k = heads(x_kv, p[f"{prefix}.wk"], len_k)
        v = heads(x_kv, p[f"{prefix}.wv"], len_k)
        attended = attention(q, k, v, mask=mask)
        merged = ag.reshape(ag.transpose(attended, (0, 2, 1, 3)), (batch, len_q, cfg.d_model))
        return ag.matmul(merged, p[f"{prefix}.wo"])

    def _add_norm(self, prefix: str, residual: Tensor, sublayer: Tensor, training: bool) -> Tensor:
        p = self.params
        sublayer = ag.dropout(sublayer, self.config.dropout, self.rng, training)
        normed = ag.layer_norm(ag.add(residual, sublayer), axis=-1)
        return ag.add(ag.mul(normed, p[f"{prefix}.gain"]), p[f"{prefix}.bias"])

    def _ffn(self, prefix: str, x: Tensor) -> Tensor:
        p = self.params
        hidden = ag.relu(ag.add(ag.matmul(x, p[f"{prefix}.w1"]), p[f"{prefix}.b1"]))
        return ag.add(ag.matmul(hidden, p[f"{prefix}.w2"]), p[f"{prefix}.b2"])

    def forward_batch(self, windows: np.ndarray, training: bool = False) -> Tensor:
        """Map [batch, input_len] windows to [batch] one-step predictions."""
        cfg = self.config
        windows = np.asarray(windows, dtype=np.float64)
        if windows.ndim != 2 or windows.shape[1] != cfg.input_len:
            raise ValueError(f"expected windows of shape [batch, {cfg.input_len}]")
        batch = windows.shape[0]
        p = self.params

        tokens = Tensor(windows[:, :, None])
        x = ag.add(ag.matmul(tokens, p["embed_in.w"]), p["embed_in.b"])
        x = ag.add(x, Tensor(self._positions[: cfg.input_len]))
        x = ag.dropout(x, cfg.dropout, self.rng, training)
        for i in range(cfg.encoder_layers):
            attn = self._multi_head(f"enc{i}.attn", x, x, mask=None)
            x = self._add_norm(f"enc{i}.ln1", x, attn, training)
            x = self._add_norm(f"enc{i}.ln2", x, self._ffn(f"enc{i}.ffn", x), training)
        encoded = x

        seed_token = Tensor(windows[:, -1:, None])
        y = ag.add(ag.matmul(seed_token, p["embed_out.w"]), p["embed_out.b"])
        y = ag.add(y, Tensor(self._positions[:1]))
        y = ag.dropout(y, cfg.dropout, self.rng, training)
        mask = causal_mask(1)
        for i in range(cfg.decoder_layers):
            self_attn = self._multi_head(f"dec{i}.self_attn", y, y, mask=mask)
            y = self._add_norm(f"dec{i}.ln0", y, self_attn, training)
            cross = self._multi_head(f"dec{i}.cross_attn", y, encoded, mask=None)
            y = self._add_norm(f"dec{i}.ln1", y, cross, training)
            y = self._add_norm(f"dec{i}.ln2", y, self._ffn(f"dec{i}.ffn", y), training)

        out = ag.add(ag.matmul(y, p["head.w"]), p["head.b"])
        return ag.reshape(out, (batch,))

    def forward(self, window, training: bool = False) -> float:
        """Single window -> single prediction."""
        window = np.asarray(window, dtype=np.float64)
        return float(self.forward_batch(window[None, :], training=training).data[0])


def make_windows(values: np.ndarray, input_len: int) -> tuple[np.ndarray, np.ndarray]:
    """All sliding (window, next value) pairs."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n < input_len + 1:
        raise ValueError(
            f"series of length {n} has no complete window+target pair for input_len {input_len}"
        )
    num = n - input_len
    x = np.stack([values[i : i + input_len] for i in range(num)])
    y = values[input_len:]
    return x, y


def train_model(
    model: TransformerModel, values: np.ndarray, epochs: int | None = None
) -> list[float]:
    """Sliding-window MSE training with Adam; returns the mean loss per epoch."""
    cfg = model.config
    epochs = cfg.epochs if epochs is None else epochs
    x, y = make_windows(values, cfg.input_len)
    optimizer = ag.Adam(model.parameters(), lr=cfg.learning_rate)
    trace: list[float] = []
    num = x.shape[0]
    for _ in range(epochs):
        order = model.rng.permutation(num)
        epoch_loss = 0.0
        for start in range(0, num, cfg.batch_size):
            batch_idx = order[start : start + cfg.batch_size]
            pred = model.forward_batch(x[batch_idx], training=True)
            loss = ag.mse_loss(pred, Tensor(y[batch_idx]))
            if not np.isfinite(loss.data):
                raise FloatingPointError("training diverged: non-finite loss")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.data) * batch_idx.size
        trace.append(epoch_loss / num)
    return trace


def predict_recursive(model: TransformerModel, history: np.ndarray, horizon: int) -> np.ndarray:
    """h-step forecast by feeding each one-step prediction back into the window."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    history = np.asarray(history, dtype=np.float64)
    if history.size < model.config.input_len:
        raise ValueError("history shorter than the model input length")
    window = list(history[-model.config.input_len :])
    out = np.empty(horizon)
    for step in range(horizon):
        pred = model.forward(np.array(window), training=False)
        out[step] = pred
        window = window[1:] + [pred]
    return out


def in_sample_mse(model: TransformerModel, values: np.ndarray) -> float:
    """Eval-mode one-step MSE over every training window."""
    x, y = make_windows(values, model.config.input_len)
    pred = model.forward_batch(x, training=False).data
    return float(np.mean((pred - y) ** 2))


def save_checkpoint(model: TransformerModel, path) -> None:
    """npz archive: one array per parameter plus a JSON header (config + seed)."""
    header = json.dumps({"config": asdict(model.config), "seed": model.seed})
    arrays = {f"param:{k}": v.data for k, v in model.params.items()}
    np.savez(path, header=np.frombuffer(header.encode(), dtype=np.uint8), **arrays)


def load_checkpoint(path) -> TransformerModel:
    with np.load(path) as archive:
        header = json.loads(archive["header"].tobytes().decode())
        model = TransformerModel(TransformerConfig(**header["config"]), seed=header["seed"])
        for key in archive.files:
            if key.startswith("param:"):
                name = key[len("param:") :]
                model.params[name].data = archive[key].copy()
    return model
