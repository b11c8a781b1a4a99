"""Parameter update rules: plain SGD, RMSProp, and Adam.

Each rule keeps explicit per-parameter state and applies updates in
place on the network arrays (bumping the network version counter so
stale forward caches are refused). Defaults follow common practice:
lr=1e-3, beta1=0.9, beta2=0.999, rho=0.9, epsilon=1e-8, with epsilon
added outside the square root.

A learning rate of exactly zero is accepted: it turns every rule into a
no-op, which is useful for null-update sanity checks.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .network import GradientSet, Network

OPTIMIZER_KINDS = ("sgd", "rmsprop", "adam")


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "adam"
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    rho: float = 0.9
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ConfigError(
                f"unknown optimizer {self.kind!r}, expected one of {OPTIMIZER_KINDS}"
            )
        if self.learning_rate < 0.0:
            raise ConfigError(
                f"learning_rate must be non-negative, got {self.learning_rate}"
            )
        for name, value in (
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("rho", self.rho),
        ):
            if not 0.0 <= value < 1.0:
                raise ConfigError(f"{name} must be in [0, 1), got {value}")
        if self.epsilon <= 0.0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(eq=False)
class OptimizerState:
    step: int
    first_moment: list[np.ndarray]
    second_moment: list[np.ndarray]


def _params(net: Network) -> list[np.ndarray]:
    """Flat parameter list, weights then bias per layer, in layer order."""
    out = []
    for w, b in zip(net.weights, net.biases):
        out.append(w)
        out.append(b)
    return out


def _grad_list(net: Network, grads: GradientSet) -> list[np.ndarray]:
    if len(grads.dweights) != len(net.weights) or len(grads.dbiases) != len(
        net.biases
    ):
        raise ShapeError(
            f"gradient set covers {len(grads.dweights)} layers, network has "
            f"{len(net.weights)}"
        )
    out = []
    for i, (dw, db) in enumerate(zip(grads.dweights, grads.dbiases)):
        if dw.shape != net.weights[i].shape or db.shape != net.biases[i].shape:
            raise ShapeError(
                f"layer {i} gradient shapes {dw.shape}/{db.shape} do not match "
                f"parameters {net.weights[i].shape}/{net.biases[i].shape}"
            )
        out.append(dw)
        out.append(db)
    return out


def init_state(net: Network) -> OptimizerState:
    zeros = [np.zeros_like(p) for p in _params(net)]
    return OptimizerState(
        step=0,
        first_moment=zeros,
        second_moment=[np.zeros_like(p) for p in _params(net)],
    )


def sgd_step(net: Network, grads: GradientSet, cfg: OptimizerConfig) -> Network:
    """w <- w - lr * g for every parameter."""
    for p, g in zip(_params(net), _grad_list(net, grads)):
        p -= cfg.learning_rate * g
    net.version += 1
    return net


def rmsprop_step(
    state: OptimizerState, net: Network, grads: GradientSet, cfg: OptimizerConfig
) -> tuple[Network, OptimizerState]:
    """v <- rho*v + (1-rho)*g^2; w <- w - lr * g / (sqrt(v) + eps)."""
    for p, g, v in zip(_params(net), _grad_list(net, grads), state.second_moment):
        v *= cfg.rho
        v += (1.0 - cfg.rho) * g * g
        p -= cfg.learning_rate * g / (np.sqrt(v) + cfg.epsilon)
    state.step += 1
    net.version += 1
    return net, state


def adam_step(
    state: OptimizerState, net: Network, grads: GradientSet, cfg: OptimizerConfig
) -> tuple[Network, OptimizerState]:
    """Adam with bias correction; epsilon sits outside the square root."""
    t = state.step + 1
    bc1 = 1.0 - cfg.beta1**t
    bc2 = 1.0 - cfg.beta2**t
    for p, g, m, v in zip(
        _params(net), _grad_list(net, grads), state.first_moment, state.second_moment
    ):
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * g * g
        p -= cfg.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + cfg.epsilon)
    state.step = t
    net.version += 1
    return net, state


def apply_update(
    state: OptimizerState, net: Network, grads: GradientSet, cfg: OptimizerConfig
) -> tuple[Network, OptimizerState]:
    """Dispatch one update by cfg.kind."""
    if cfg.kind == "sgd":
        net = sgd_step(net, grads, cfg)
        state.step += 1
        return net, state
    if cfg.kind == "rmsprop":
        return rmsprop_step(state, net, grads, cfg)
    return adam_step(state, net, grads, cfg)
