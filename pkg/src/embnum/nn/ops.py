"""Differentiable layer operations for 1-D feature maps.

All ops take (batch, channels, length) arrays.  Convolution forward/backward
is expressed with non-optimized einsum over a strided sliding window, so the
per-output-element reduction order is fixed and results do not depend on how
items are batched together.

A small tracing hook records where piecewise-linear ops (relu, maxpool) sit
relative to their kinks; numerical gradient checks use it to skip coordinates
whose perturbation would cross a kink.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

from .tensor import Tensor, make

_KINKS: list[np.ndarray] | None = None


@contextmanager
def trace_kinks(buf: list[np.ndarray]):
    """Collect relu sign masks and maxpool argmax indices into buf."""
    global _KINKS
    prev = _KINKS
    _KINKS = buf
    try:
        yield buf
    finally:
        _KINKS = prev


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    if _KINKS is not None:
        _KINKS.append(mask.copy())
    out = make(np.where(mask, x.data, np.zeros_like(x.data)), (x,))
    if out.requires_grad:
        out._backward = lambda g, a=x, m=mask: a.accumulate(g * m)
    return out


def conv1d(x: Tensor, weight: Tensor, bias: Tensor | None = None,
           stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlation along the last axis.

    x: (B, C_in, L), weight: (C_out, C_in, K), bias: (C_out,) or None.
    Output length is (L + 2*padding - K) // stride + 1.

    The windows are materialized as a contiguous (B, L_out, C_in*K) block and
    reduced over the trailing axis; einsum then takes its unbuffered
    per-element path, which keeps each output's summation order independent
    of batch size (strided-view operands do not guarantee this).
    """
    b, c_in, length = x.data.shape
    c_out, c_in_w, k = weight.data.shape
    if c_in != c_in_w:
        raise ValueError(f"conv1d channel mismatch: input {c_in}, weight {c_in_w}")
    xp = x.data
    if padding:
        xp = np.pad(xp, ((0, 0), (0, 0), (padding, padding)))
    out_len = (length + 2 * padding - k) // stride + 1
    if out_len <= 0:
        raise ValueError(f"conv1d output would be empty: L={length} pad={padding} K={k}")
    sw = np.lib.stride_tricks.sliding_window_view(xp, k, axis=2)[:, :, ::stride]
    sw = sw[:, :, :out_len]
    col = np.ascontiguousarray(sw.transpose(0, 2, 1, 3).reshape(b, out_len, c_in * k))
    wf = np.ascontiguousarray(weight.data.reshape(c_out, c_in * k))
    y = np.einsum("blm,om->bol", col, wf)
    if bias is not None:
        y = y + bias.data[None, :, None]
    parents = (x, weight) if bias is None else (x, weight, bias)
    out = make(y, parents)
    if out.requires_grad:
        padded_len = xp.shape[2]

        def back(g, xt=x, wt=weight, bt=bias, win=col):
            if wt.requires_grad:
                wt.accumulate(np.einsum("bol,blm->om", g, win).reshape(c_out, c_in, k))
            if bt is not None and bt.requires_grad:
                bt.accumulate(g.sum(axis=(0, 2)))
            if xt.requires_grad:
                gxp = np.zeros((b, c_in, padded_len), dtype=g.dtype)
                for kk in range(k):
                    gxp[:, :, kk : kk + stride * out_len : stride] += np.einsum(
                        "bol,oc->bcl", g, wt.data[:, :, kk]
                    )
                if padding:
                    gxp = gxp[:, :, padding : padded_len - padding]
                xt.accumulate(gxp)

        out._backward = back
    return out


def batchnorm1d(x: Tensor, gamma: Tensor, beta: Tensor,
                running_mean: np.ndarray, running_var: np.ndarray,
                training: bool, momentum: float = 0.1,
                eps: float = 1e-5) -> Tensor:
    """Per-channel normalization over the (batch, length) axes.

    In training mode the batch statistics (biased variance) both normalize
    the activations and update the running buffers in place.
    """
    if training:
        mean = x.data.mean(axis=(0, 2))
        var = x.data.var(axis=(0, 2))
        running_mean *= 1.0 - momentum
        running_mean += momentum * mean
        running_var *= 1.0 - momentum
        running_var += momentum * var
    else:
        mean = running_mean
        var = running_var
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mean[None, :, None]) * inv[None, :, None]
    y = gamma.data[None, :, None] * xhat + beta.data[None, :, None]
    out = make(y.astype(x.data.dtype, copy=False), (x, gamma, beta))
    if out.requires_grad:

        def back(g, xt=x, gt=gamma, bt=beta, xh=xhat, iv=inv, train=training):
            if bt.requires_grad:
                bt.accumulate(g.sum(axis=(0, 2)))
            if gt.requires_grad:
                gt.accumulate((g * xh).sum(axis=(0, 2)))
            if xt.requires_grad:
                if train:
                    n = g.shape[0] * g.shape[2]
                    sum_g = g.sum(axis=(0, 2), keepdims=True)
                    sum_gx = (g * xh).sum(axis=(0, 2), keepdims=True)
                    scale = (gt.data * iv)[None, :, None] / n
                    xt.accumulate(scale * (n * g - sum_g - xh * sum_gx))
                else:
                    xt.accumulate(g * (gt.data * iv)[None, :, None])

        out._backward = back
    return out


def maxpool1d(x: Tensor, kernel: int, stride: int, padding: int = 0) -> Tensor:
    """Max over sliding windows; padded positions are -inf and never win."""
    b, c, length = x.data.shape
    xp = x.data
    if padding:
        xp = np.pad(xp, ((0, 0), (0, 0), (padding, padding)),
                    constant_values=-np.inf)
    out_len = (length + 2 * padding - kernel) // stride + 1
    sw = np.lib.stride_tricks.sliding_window_view(xp, kernel, axis=2)[:, :, ::stride]
    sw = sw[:, :, :out_len]
    idx = np.argmax(sw, axis=3)
    if _KINKS is not None:
        _KINKS.append(idx.copy())
    y = np.take_along_axis(sw, idx[..., None], axis=3)[..., 0]
    out = make(y, (x,))
    if out.requires_grad:

        def back(g, xt=x, am=idx):
            gxp = np.zeros((b, c, length + 2 * padding), dtype=g.dtype)
            bb, cc, tt = np.indices(am.shape)
            np.add.at(gxp, (bb, cc, tt * stride + am), g)
            if padding:
                gxp = gxp[:, :, padding : padding + length]
            xt.accumulate(gxp)

        out._backward = back
    return out


def global_avgpool1d(x: Tensor) -> Tensor:
    """Mean over the length axis: (B, C, L) -> (B, C)."""
    length = x.data.shape[2]
    out = make(x.data.mean(axis=2), (x,))
    if out.requires_grad:
        out._backward = lambda g, a=x: a.accumulate(
            np.repeat(g[:, :, None], length, axis=2) / length
        )
    return out


def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Affine map on feature vectors: (B, F) x (O, F) + (O,) -> (B, O)."""
    y = np.einsum("bf,of->bo", x.data, weight.data) + bias.data[None, :]
    out = make(y, (x, weight, bias))
    if out.requires_grad:

        def back(g, xt=x, wt=weight, bt=bias):
            if xt.requires_grad:
                xt.accumulate(np.einsum("bo,of->bf", g, wt.data))
            if wt.requires_grad:
                wt.accumulate(np.einsum("bo,bf->of", g, xt.data))
            if bt.requires_grad:
                bt.accumulate(g.sum(axis=0))

        out._backward = back
    return out
