"""Dense feedforward regression network with hand-derived backpropagation.

Layers compute z = x @ W + b followed by an activation (ReLU for hidden
layers, linear for the scalar output). Inverted dropout after a hidden
layer zeroes activations with probability `dropout_after` and scales the
survivors by 1/keep at train time, so inference needs no correction.
The training objective is the data loss (MSE by default, MAE optional)
plus L1/L2 penalties on weights only; biases are never penalized and the
L1 subgradient at exactly zero is taken as zero.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, Normalizer, normalize_features
from .errors import ConfigError, ContractError, ShapeError
from .rng import make_rng

ACTIVATIONS = ("relu", "linear")
LOSS_KINDS = ("mse", "mae")


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: str = "relu"
    dropout_after: float = 0.0

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ConfigError(
                f"layer dims must be >= 1, got {self.in_dim}x{self.out_dim}"
            )
        if self.activation not in ACTIVATIONS:
            raise ConfigError(
                f"unknown activation {self.activation!r}, expected one of "
                f"{ACTIVATIONS}"
            )
        if not 0.0 <= self.dropout_after < 1.0:
            raise ConfigError(
                f"dropout_after must be in [0, 1), got {self.dropout_after}"
            )


@dataclass(frozen=True)
class RegConfig:
    l1: float = 0.0
    l2: float = 0.0

    def __post_init__(self):
        if self.l1 < 0.0 or self.l2 < 0.0:
            raise ConfigError(
                f"penalty coefficients must be non-negative, got "
                f"l1={self.l1}, l2={self.l2}"
            )


@dataclass(eq=False)
class Network:
    """Layer specs plus live parameter arrays.

    `version` counts in-place parameter updates; forward caches record it
    so backward can refuse to run against parameters that changed after
    the cached pass.
    """

    layers: tuple[LayerSpec, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    version: int = 0

    def __post_init__(self):
        if not self.layers:
            raise ConfigError("network needs at least one layer")
        for i in range(len(self.layers) - 1):
            if self.layers[i].out_dim != self.layers[i + 1].in_dim:
                raise ShapeError(
                    f"layer {i} out_dim {self.layers[i].out_dim} does not chain "
                    f"into layer {i + 1} in_dim {self.layers[i + 1].in_dim}"
                )
        last = self.layers[-1]
        if last.activation != "linear" or last.out_dim != 1:
            raise ConfigError(
                "final layer must be linear with out_dim 1 for scalar regression"
            )
        if len(self.weights) != len(self.layers) or len(self.biases) != len(
            self.layers
        ):
            raise ShapeError(
                f"{len(self.layers)} layers but {len(self.weights)} weight and "
                f"{len(self.biases)} bias arrays"
            )
        for i, (spec, w, b) in enumerate(zip(self.layers, self.weights, self.biases)):
            if w.shape != (spec.in_dim, spec.out_dim):
                raise ShapeError(
                    f"layer {i} weights {w.shape} do not match spec "
                    f"({spec.in_dim}, {spec.out_dim})"
                )
            if b.shape != (spec.out_dim,):
                raise ShapeError(
                    f"layer {i} biases {b.shape} do not match spec "
                    f"({spec.out_dim},)"
                )

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))


@dataclass(eq=False)
class GradientSet:
    dweights: list[np.ndarray]
    dbiases: list[np.ndarray]


@dataclass(eq=False)
class ForwardCache:
    """Everything backward needs to replay one train-mode pass exactly."""

    mode: str
    inputs: list[np.ndarray] = field(default_factory=list)
    pre_acts: list[np.ndarray] = field(default_factory=list)
    masks: list[np.ndarray | None] = field(default_factory=list)
    pred: np.ndarray | None = None
    net: Network | None = None
    net_version: int = -1


def make_specs(
    hidden: int, units: int, dropout: float, in_dim: int = 3
) -> tuple[LayerSpec, ...]:
    """Build a layer stack from a hidden-layer count.

    The count follows the common convention of counting dropout layers:
    with dropout > 0 each pair is one dense hidden layer followed by one
    dropout layer, so `hidden` must be even and yields hidden/2 dense
    layers. With dropout == 0 every hidden layer is dense.
    """
    if hidden < 1:
        raise ConfigError(f"hidden layer count must be >= 1, got {hidden}")
    if dropout > 0.0:
        if hidden % 2 != 0:
            raise ConfigError(
                f"with dropout, hidden={hidden} must be even: each dense layer "
                "pairs with one dropout layer"
            )
        n_dense = hidden // 2
    else:
        n_dense = hidden
    specs = []
    prev = in_dim
    for _ in range(n_dense):
        specs.append(
            LayerSpec(in_dim=prev, out_dim=units, activation="relu",
                      dropout_after=dropout)
        )
        prev = units
    specs.append(LayerSpec(in_dim=prev, out_dim=1, activation="linear"))
    return tuple(specs)


def init_network(specs, seed: int) -> Network:
    """He-style init: W ~ Normal(0, sqrt(2/in_dim)), biases zero."""
    specs = tuple(specs)
    rng = make_rng(seed)
    weights = []
    biases = []
    for spec in specs:
        scale = math.sqrt(2.0 / spec.in_dim)
        weights.append(rng.normal(0.0, scale, size=(spec.in_dim, spec.out_dim)))
        biases.append(np.zeros(spec.out_dim, dtype=np.float64))
    return Network(layers=specs, weights=weights, biases=biases)


def _check_input(net: Network, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.in_dim:
        raise ShapeError(
            f"input {x.shape} does not match network input width ({net.in_dim})"
        )
    return x


def forward(
    net: Network,
    x: np.ndarray,
    mode: str = "inference",
    dropout_rng: np.random.Generator | None = None,
    dropout_masks: list | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    """Run the stack; returns (predictions, cache).

    In train mode, dropout masks are drawn from dropout_rng unless an
    explicit mask list (as recorded in a previous cache) is supplied for
    replay. Inference mode is a pure function of (net, x).
    """
    if mode not in ("train", "inference"):
        raise ConfigError(f"mode must be 'train' or 'inference', got {mode!r}")
    x = _check_input(net, x)
    has_dropout = any(spec.dropout_after > 0.0 for spec in net.layers)
    if mode == "train" and has_dropout and dropout_rng is None and dropout_masks is None:
        raise ContractError("train-mode forward with dropout needs a seeded stream")
    if dropout_masks is not None and len(dropout_masks) != len(net.layers):
        raise ContractError(
            f"{len(dropout_masks)} replay masks for {len(net.layers)} layers"
        )

    cache = ForwardCache(mode=mode, net=net, net_version=net.version)
    a = x
    for li, spec in enumerate(net.layers):
        cache.inputs.append(a)
        z = a @ net.weights[li] + net.biases[li]
        cache.pre_acts.append(z)
        a = np.maximum(z, 0.0) if spec.activation == "relu" else z
        mask = None
        if mode == "train" and spec.dropout_after > 0.0:
            keep = 1.0 - spec.dropout_after
            if dropout_masks is not None:
                mask = dropout_masks[li]
                if mask is None or mask.shape != a.shape:
                    raise ContractError(
                        f"replay mask for layer {li} missing or misshapen"
                    )
            else:
                mask = (dropout_rng.random(a.shape) < keep).astype(np.float64)
            a = a * mask / keep
        cache.masks.append(mask)
    pred = a[:, 0]
    cache.pred = pred
    return pred, cache


def loss_mse(pred: np.ndarray, target: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.ndim != 1:
        raise ShapeError(f"pred {pred.shape} and target {target.shape} must match")
    diff = target - pred
    return float(np.mean(diff * diff))


def loss_mae(pred: np.ndarray, target: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.ndim != 1:
        raise ShapeError(f"pred {pred.shape} and target {target.shape} must match")
    return float(np.mean(np.abs(target - pred)))


def data_loss(pred: np.ndarray, target: np.ndarray, kind: str) -> float:
    if kind == "mse":
        return loss_mse(pred, target)
    if kind == "mae":
        return loss_mae(pred, target)
    raise ConfigError(f"unknown loss {kind!r}, expected one of {LOSS_KINDS}")


def penalty(net: Network, reg: RegConfig) -> float:
    """l2 * sum of squared weights + l1 * sum of absolute weights."""
    if reg.l1 == 0.0 and reg.l2 == 0.0:
        return 0.0
    sum_sq = 0.0
    sum_abs = 0.0
    for w in net.weights:
        sum_sq += float(np.sum(w * w))
        sum_abs += float(np.sum(np.abs(w)))
    return reg.l2 * sum_sq + reg.l1 * sum_abs


def backward(
    net: Network,
    cache: ForwardCache,
    target: np.ndarray,
    reg: RegConfig,
    loss_kind: str = "mse",
) -> tuple[GradientSet, float]:
    """Gradients of [data loss + penalties] for every weight and bias.

    The cache must come from a train-mode forward against the current
    parameters; dropout masks recorded there are replayed exactly.
    Returns the gradient set and the full objective value.
    """
    if cache.mode != "train":
        raise ContractError("backward needs a train-mode forward cache")
    if cache.net is not net or cache.net_version != net.version:
        raise ContractError(
            "forward cache is stale: parameters changed since the cached pass"
        )
    if len(cache.inputs) != len(net.layers):
        raise ContractError(
            f"cache covers {len(cache.inputs)} layers, network has "
            f"{len(net.layers)}"
        )
    target = np.asarray(target, dtype=np.float64)
    pred = cache.pred
    if target.shape != pred.shape:
        raise ShapeError(f"target {target.shape} does not match pred {pred.shape}")
    n = pred.shape[0]

    base = data_loss(pred, target, loss_kind)
    if loss_kind == "mse":
        dpred = (2.0 / n) * (pred - target)
    else:
        dpred = np.sign(pred - target) / n

    grad = dpred[:, None]
    dweights: list[np.ndarray] = [None] * len(net.layers)
    dbiases: list[np.ndarray] = [None] * len(net.layers)
    for li in range(len(net.layers) - 1, -1, -1):
        spec = net.layers[li]
        mask = cache.masks[li]
        if mask is not None:
            grad = grad * mask / (1.0 - spec.dropout_after)
        if spec.activation == "relu":
            dz = grad * (cache.pre_acts[li] > 0.0)
        else:
            dz = grad
        dw = cache.inputs[li].T @ dz
        if reg.l2 > 0.0:
            dw += 2.0 * reg.l2 * net.weights[li]
        if reg.l1 > 0.0:
            dw += reg.l1 * np.sign(net.weights[li])
        dweights[li] = dw
        dbiases[li] = dz.sum(axis=0)
        if li > 0:
            grad = dz @ net.weights[li].T
    return GradientSet(dweights=dweights, dbiases=dbiases), base + penalty(net, reg)


def predict(net: Network, x: np.ndarray) -> np.ndarray:
    """Inference-mode forward on an already-normalized feature matrix."""
    pred, _ = forward(net, x, mode="inference")
    return pred


def predict_soc(net: Network, norm: Normalizer, raw) -> np.ndarray:
    """Normalize raw records, run inference, clamp to [0, 100] percent."""
    if norm is None:
        raise ContractError("predict_soc needs a fitted normalizer")
    if isinstance(raw, Dataset):
        dataset = raw
    else:
        dataset = Dataset(records=tuple(raw), name="records")
    x = np.array(
        [(r.voltage, r.current, r.temperature) for r in dataset.records],
        dtype=np.float64,
    )
    if x.size == 0:
        raise ConfigError("no records to predict on")
    pred = predict(net, normalize_features(norm, x))
    return np.clip(pred, 0.0, 100.0)
