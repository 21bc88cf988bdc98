"""Bidirectional LSTM sentiment scorer over fixed word embeddings.

Stacked LSTM layers read the embedded tokens in both directions, their
top-layer outputs are averaged over time and a linear + sigmoid head maps
the pooled vector to a score in (0, 1). Training is plain minibatch SGD on
binary cross-entropy with exact backpropagation through time.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InputError
from .weights import WeightFormatError, read_tensors, write_tensors

CLAMP = 1e-7


def sigmoid(x):
    return np.exp(-np.logaddexp(0.0, -np.asarray(x, dtype=np.float64)))


@dataclass(frozen=True)
class ModelConfig:
    embed_dim: int = 300
    hidden_dim: int = 300
    layers: int = 2
    bidirectional: bool = True

    def __post_init__(self):
        if min(self.embed_dim, self.hidden_dim, self.layers) < 1:
            raise InputError(f"model dimensions must be positive: {self}")

    @property
    def directions(self):
        return ("fwd", "bwd") if self.bidirectional else ("fwd",)

    @property
    def output_dim(self):
        return len(self.directions) * self.hidden_dim

    def input_dim(self, layer):
        return self.embed_dim if layer == 1 else self.output_dim

    def shapes(self):
        """Canonical tensor names and shapes, in file order."""
        H = self.hidden_dim
        out = {}
        for layer in range(1, self.layers + 1):
            for d in self.directions:
                out[f"l{layer}.{d}.W_ih"] = (4 * H, self.input_dim(layer))
                out[f"l{layer}.{d}.W_hh"] = (4 * H, H)
                out[f"l{layer}.{d}.b"] = (4 * H,)
        out["head.W"] = (1, self.output_dim)
        out["head.b"] = (1,)
        return out


@dataclass
class SentimentModel:
    config: ModelConfig
    params: dict = field(default_factory=dict)

    @classmethod
    def zeros(cls, config: ModelConfig) -> "SentimentModel":
        return cls(config, {k: np.zeros(s) for k, s in config.shapes().items()})

    @classmethod
    def init(cls, config: ModelConfig, seed: int = 0) -> "SentimentModel":
        """Uniform(-1/sqrt(H), 1/sqrt(H)) everywhere, forget-gate bias +1."""
        rng = np.random.default_rng([seed, 0])
        bound = 1.0 / math.sqrt(config.hidden_dim)
        H = config.hidden_dim
        params = {}
        for name, shape in config.shapes().items():
            params[name] = rng.uniform(-bound, bound, size=shape)
            if name.endswith(".b") and name.startswith("l"):
                params[name][H : 2 * H] += 1.0
        return cls(config, params)

    def copy(self) -> "SentimentModel":
        return SentimentModel(self.config, {k: v.copy() for k, v in self.params.items()})

    def score(self, seq) -> float:
        return forward(self, seq)

    def score_tokens(self, tokens, table):
        """Score a token list; ``None`` when every token is out of vocabulary."""
        seq = table.embed(tokens)
        return None if seq.shape[0] == 0 else forward(self, seq)


# -- forward -----------------------------------------------------------------


def _gates(z, H):
    i = sigmoid(z[:H])
    f = sigmoid(z[H : 2 * H])
    g = np.tanh(z[2 * H : 3 * H])
    o = sigmoid(z[3 * H :])
    return i, f, g, o


def lstm_cell_forward(x, h, c, W_ih, W_hh, b):
    """One LSTM step with gate blocks ordered (input, forget, cell, output)."""
    x, h, c = (np.asarray(v, dtype=np.float64) for v in (x, h, c))
    H = h.shape[0]
    if W_ih.shape != (4 * H, x.shape[0]) or W_hh.shape != (4 * H, H) or b.shape != (4 * H,):
        raise InputError(
            f"lstm cell shape mismatch: x{x.shape} h{h.shape} "
            f"W_ih{W_ih.shape} W_hh{W_hh.shape} b{b.shape}"
        )
    if c.shape != h.shape:
        raise InputError(f"cell state shape {c.shape} != hidden shape {h.shape}")
    i, f, g, o = _gates(W_ih @ x + W_hh @ h + b, H)
    c_new = f * c + i * g
    return o * np.tanh(c_new), c_new


def _run_direction(X, W_ih, W_hh, b, reverse):
    T = X.shape[0]
    H = W_hh.shape[1]
    pre = X @ W_ih.T + b
    hs = np.zeros((T, H))
    cache = [None] * T
    h = np.zeros(H)
    c = np.zeros(H)
    for t in (range(T - 1, -1, -1) if reverse else range(T)):
        i, f, g, o = _gates(pre[t] + W_hh @ h, H)
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        cache[t] = (i, f, g, o, c, h, tc)
        hs[t] = h_new
        h, c = h_new, c_new
    return hs, cache


def _forward_cached(model: SentimentModel, seq):
    cfg = model.config
    X = np.asarray(seq, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InputError("unscorable: empty token sequence")
    if X.shape[1] != cfg.embed_dim:
        raise InputError(f"sequence width {X.shape[1]} != embed_dim {cfg.embed_dim}")
    p = model.params
    inputs, caches = [], []
    for layer in range(1, cfg.layers + 1):
        inputs.append(X)
        outs, layer_cache = [], {}
        for d in cfg.directions:
            key = f"l{layer}.{d}"
            hs, cache = _run_direction(
                X, p[key + ".W_ih"], p[key + ".W_hh"], p[key + ".b"], reverse=(d == "bwd")
            )
            outs.append(hs)
            layer_cache[d] = cache
        caches.append(layer_cache)
        X = np.concatenate(outs, axis=1)
    pooled = X.mean(axis=0)
    logit = float(p["head.W"][0] @ pooled + p["head.b"][0])
    score = float(sigmoid(logit))
    return score, (inputs, caches, pooled)


def forward(model: SentimentModel, seq) -> float:
    """Score one embedded sequence (T x embed_dim)."""
    return _forward_cached(model, seq)[0]


def bce_loss(score, label) -> float:
    s = min(max(float(score), CLAMP), 1.0 - CLAMP)
    return -(label * math.log(s) + (1 - label) * math.log(1.0 - s))


# -- backward ----------------------------------------------------------------


def _backprop_direction(dH, X, cache, W_ih, W_hh, reverse):
    T, H = dH.shape
    dZ = np.zeros((T, 4 * H))
    dW_hh = np.zeros_like(W_hh)
    dh_next = np.zeros(H)
    dc_next = np.zeros(H)
    for t in (range(T) if reverse else range(T - 1, -1, -1)):
        i, f, g, o, c_prev, h_prev, tc = cache[t]
        dh = dH[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dz = dZ[t]
        dz[:H] = dc * g * i * (1.0 - i)
        dz[H : 2 * H] = dc * c_prev * f * (1.0 - f)
        dz[2 * H : 3 * H] = dc * i * (1.0 - g * g)
        dz[3 * H :] = dh * tc * o * (1.0 - o)
        dW_hh += np.outer(dz, h_prev)
        dh_next = W_hh.T @ dz
        dc_next = dc * f
    return dZ.T @ X, dW_hh, dZ.sum(axis=0), dZ @ W_ih


def backward(model: SentimentModel, batch):
    """Mean BCE over ``batch`` and its exact gradient for every tensor.

    ``batch`` holds ``(sequence, label)`` pairs. Embeddings are inputs, so
    they receive no gradient.
    """
    cfg = model.config
    p = model.params
    H = cfg.hidden_dim
    grads = {k: np.zeros_like(v) for k, v in p.items()}
    total = 0.0
    weight = 1.0 / len(batch)
    for seq, label in batch:
        score, (inputs, caches, pooled) = _forward_cached(model, seq)
        total += bce_loss(score, label)
        dlogit = (score - label) * weight
        grads["head.W"][0] += dlogit * pooled
        grads["head.b"][0] += dlogit
        T = inputs[0].shape[0]
        dOut = np.tile(dlogit * p["head.W"][0] / T, (T, 1))
        for layer in range(cfg.layers, 0, -1):
            X = inputs[layer - 1]
            dX = np.zeros_like(X)
            for k, d in enumerate(cfg.directions):
                key = f"l{layer}.{d}"
                dW_ih, dW_hh, db, dXd = _backprop_direction(
                    dOut[:, k * H : (k + 1) * H],
                    X,
                    caches[layer - 1][d],
                    p[key + ".W_ih"],
                    p[key + ".W_hh"],
                    reverse=(d == "bwd"),
                )
                grads[key + ".W_ih"] += dW_ih
                grads[key + ".W_hh"] += dW_hh
                grads[key + ".b"] += db
                dX += dXd
            dOut = dX
    return total * weight, grads


# -- training ----------------------------------------------------------------


@dataclass(frozen=True)
class LabeledExample:
    tokens: tuple
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise InputError(f"label must be 0 or 1, got {self.label!r}")


@dataclass
class TrainConfig:
    epochs: int = 4
    lr: float = 0.1
    batch_size: int = 16
    clip: float = 5.0
    seed: int = 0
    split: tuple = (0.8, 0.1, 0.1)

    def __post_init__(self):
        if self.epochs < 1:
            raise InputError("epochs must be >= 1")
        if self.lr < 0:
            raise InputError("learning rate must be non-negative")
        if self.batch_size < 1:
            raise InputError("batch size must be >= 1")
        if len(self.split) != 3 or abs(sum(self.split) - 1.0) > 1e-9 or min(self.split) < 0:
            raise InputError(f"split fractions must be non-negative and sum to 1: {self.split}")


@dataclass
class EpochMetrics:
    epoch: int
    train_loss: float
    train_accuracy: float
    valid_loss: float | None
    valid_accuracy: float | None


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)
    test_loss: float | None = None
    test_accuracy: float | None = None
    sizes: dict = field(default_factory=dict)
    skipped_oov: int = 0

    def to_dict(self):
        return asdict(self)


def split_indices(n, split, rng):
    """Shuffle ``range(n)`` and cut it into train/valid/test index arrays."""
    order = rng.permutation(n)
    n_train = int(round(split[0] * n))
    n_valid = int(round(split[1] * n))
    n_train = min(n_train, n)
    n_valid = min(n_valid, n - n_train)
    return order[:n_train], order[n_train : n_train + n_valid], order[n_train + n_valid :]


def evaluate(scorer, data):
    """Mean BCE and accuracy (threshold 0.5) of ``scorer`` on ``(seq, label)`` pairs."""
    if not data:
        return None, None
    loss = correct = 0
    for seq, label in data:
        s = scorer(seq)
        loss += bce_loss(s, label)
        correct += int((s >= 0.5) == bool(label))
    return loss / len(data), correct / len(data)


def clip_gradients(grads, max_norm):
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if max_norm and norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


def prepare_dataset(dataset, table):
    """Embed labeled examples; all-OOV examples are dropped and counted."""
    data, skipped = [], 0
    for ex in dataset:
        seq = table.embed(ex.tokens)
        if seq.shape[0] == 0:
            skipped += 1
            continue
        data.append((seq, ex.label))
    return data, skipped


def _sgd_loop(params, data, cfg, grad_fn, scorer):
    labels = {lab for _, lab in data}
    if not data:
        raise InputError("training set is empty")
    if labels != {0, 1}:
        raise InputError("degenerate labels: training data needs both classes")
    rng = np.random.default_rng([cfg.seed, 1])
    tr, va, te = split_indices(len(data), cfg.split, rng)
    train_set = [data[i] for i in tr]
    valid_set = [data[i] for i in va]
    test_set = [data[i] for i in te]
    if not train_set:
        raise InputError("training split is empty")

    report = TrainReport(sizes={"train": len(tr), "valid": len(va), "test": len(te)})
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(train_set))
        for start in range(0, len(order), cfg.batch_size):
            batch = [train_set[j] for j in order[start : start + cfg.batch_size]]
            _, grads = grad_fn(batch)
            clip_gradients(grads, cfg.clip)
            if cfg.lr:
                for name, g in grads.items():
                    params[name] -= cfg.lr * g
        train_loss, train_acc = evaluate(scorer, train_set)
        valid_loss, valid_acc = evaluate(scorer, valid_set)
        report.epochs.append(EpochMetrics(epoch, train_loss, train_acc, valid_loss, valid_acc))
    report.test_loss, report.test_accuracy = evaluate(scorer, test_set)
    return report


def train(model: SentimentModel, dataset, cfg: TrainConfig, table):
    """Train ``model`` in place on labeled examples and return ``(model, report)``.

    The data is shuffled and split with ``cfg.split``; each epoch is one
    shuffled pass of clipped minibatch SGD over the training part.
    """
    data, skipped = prepare_dataset(dataset, table)
    report = _sgd_loop(
        model.params, data, cfg, lambda batch: backward(model, batch), model.score
    )
    report.skipped_oov = skipped
    return model, report


def save_weights(model, sink):
    write_tensors(sink, model.params)


def config_from_tensors(tensors) -> ModelConfig:
    for name in ("l1.fwd.W_ih", "l1.fwd.W_hh"):
        if name not in tensors:
            raise WeightFormatError(f"missing tensor {name!r}")
    layers = 0
    while f"l{layers + 1}.fwd.W_ih" in tensors:
        layers += 1
    return ModelConfig(
        embed_dim=tensors["l1.fwd.W_ih"].shape[1],
        hidden_dim=tensors["l1.fwd.W_hh"].shape[1],
        layers=layers,
        bidirectional="l1.bwd.W_ih" in tensors,
    )


def model_from_tensors(tensors, config: ModelConfig | None = None) -> SentimentModel:
    config = config or config_from_tensors(tensors)
    expected = config.shapes()
    for name, shape in expected.items():
        if name not in tensors:
            raise WeightFormatError(f"missing tensor {name!r}")
        if tuple(tensors[name].shape) != shape:
            raise WeightFormatError(
                f"tensor {name!r} has shape {tuple(tensors[name].shape)}, expected {shape}"
            )
    extra = sorted(set(tensors) - set(expected))
    if extra:
        raise WeightFormatError(f"unexpected tensor {extra[0]!r}")
    return SentimentModel(config, {name: tensors[name].copy() for name in expected})


def load_weights(source, config: ModelConfig | None = None) -> SentimentModel:
    return model_from_tensors(read_tensors(source), config)


# -- mean-embedding logistic baseline ------------------------------------------


@dataclass
class BaselineModel:
    """Logistic regression on the mean embedding of a text."""

    params: dict

    @classmethod
    def zeros(cls, dim):
        return cls({"baseline.W": np.zeros((1, dim)), "baseline.b": np.zeros(1)})

    @property
    def dim(self):
        return self.params["baseline.W"].shape[1]

    def score(self, seq) -> float:
        seq = np.asarray(seq, dtype=np.float64)
        if seq.ndim != 2 or seq.shape[0] == 0:
            raise InputError("unscorable: no in-vocabulary tokens")
        return float(sigmoid(self.params["baseline.W"][0] @ seq.mean(axis=0) + self.params["baseline.b"][0]))

    def score_tokens(self, tokens, table):
        seq = table.embed(tokens)
        return None if seq.shape[0] == 0 else self.score(seq)

    def gradients(self, batch):
        grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        total = 0.0
        for seq, label in batch:
            mean = np.asarray(seq).mean(axis=0)
            s = self.score(seq)
            total += bce_loss(s, label)
            grads["baseline.W"][0] += (s - label) * mean
            grads["baseline.b"][0] += s - label
        for g in grads.values():
            g /= len(batch)
        return total / len(batch), grads


def baseline_score(tokens, table, w, b) -> float:
    """sigmoid(w . mean(embeddings) + b) over the in-vocabulary tokens."""
    model = BaselineModel({"baseline.W": np.asarray(w, dtype=np.float64).reshape(1, -1),
                           "baseline.b": np.array([float(b)])})
    s = model.score_tokens(tokens, table)
    if s is None:
        raise InputError("unscorable: no in-vocabulary tokens")
    return s


def train_baseline(dataset, table, cfg: TrainConfig):
    model = BaselineModel.zeros(table.dim)
    data, skipped = prepare_dataset(dataset, table)
    report = _sgd_loop(model.params, data, cfg, model.gradients, model.score)
    report.skipped_oov = skipped
    return model, report


def load_scorer(source):
    """Load either an LSTM or a baseline weight file."""
    tensors = read_tensors(source)
    if "baseline.W" in tensors:
        if set(tensors) != {"baseline.W", "baseline.b"}:
            extra = sorted(set(tensors) - {"baseline.W", "baseline.b"})
            raise WeightFormatError(f"unexpected tensor {extra[0]!r}" if extra else "missing tensor 'baseline.b'")
        return BaselineModel({k: tensors[k].copy() for k in ("baseline.W", "baseline.b")})
    return model_from_tensors(tensors)
