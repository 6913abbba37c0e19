"""Parameterized layers: thin containers pairing Tensors with the ops."""

from __future__ import annotations

import numpy as np

from . import ops
from .tensor import Tensor


def he_uniform(rng: np.random.Generator, shape: tuple[int, ...],
               fan_in: int, dtype) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Conv1d:
    def __init__(self, in_channels: int, out_channels: int, kernel: int,
                 stride: int = 1, padding: int = 0, bias: bool = True, *,
                 rng: np.random.Generator, dtype=np.float32):
        self.stride = stride
        self.padding = padding
        fan_in = in_channels * kernel
        self.weight = Tensor(
            he_uniform(rng, (out_channels, in_channels, kernel), fan_in, dtype),
            requires_grad=True,
        )
        self.bias = Tensor(np.zeros(out_channels, dtype=dtype), requires_grad=True) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv1d(x, self.weight, self.bias,
                          stride=self.stride, padding=self.padding)

    def params(self) -> dict[str, Tensor]:
        out = {"weight": self.weight}
        if self.bias is not None:
            out["bias"] = self.bias
        return out


class BatchNorm1d:
    def __init__(self, channels: int, *, eps: float = 1e-5,
                 momentum: float = 0.1, dtype=np.float32):
        self.eps = eps
        self.momentum = momentum
        self.gamma = Tensor(np.ones(channels, dtype=dtype), requires_grad=True)
        self.beta = Tensor(np.zeros(channels, dtype=dtype), requires_grad=True)
        # running stats live outside the autodiff tape
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)

    def __call__(self, x: Tensor, training: bool) -> Tensor:
        return ops.batchnorm1d(x, self.gamma, self.beta,
                               self.running_mean, self.running_var,
                               training, momentum=self.momentum, eps=self.eps)

    def params(self) -> dict[str, Tensor]:
        return {"gamma": self.gamma, "beta": self.beta}

    def buffers(self) -> dict[str, np.ndarray]:
        return {"running_mean": self.running_mean, "running_var": self.running_var}


class Linear:
    def __init__(self, in_features: int, out_features: int, *,
                 rng: np.random.Generator, dtype=np.float32):
        self.weight = Tensor(
            he_uniform(rng, (out_features, in_features), in_features, dtype),
            requires_grad=True,
        )
        self.bias = Tensor(np.zeros(out_features, dtype=dtype), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.linear(x, self.weight, self.bias)

    def params(self) -> dict[str, Tensor]:
        return {"weight": self.weight, "bias": self.bias}
