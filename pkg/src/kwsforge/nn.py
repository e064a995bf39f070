"""Dense-tensor layer ops with hand-written backward passes.

Exactly the pieces the two keyword-spotting CNNs need: valid (unpadded)
strided 2-D convolution, non-overlapping max pooling with floor semantics,
ReLU, affine layers, fused softmax cross-entropy, momentum SGD, and truncated
normal init. Tensors are plain numpy arrays; every op accepts a single sample
(C, H, W) / (D,) or a batch with one extra leading axis.

Convolution forward is im2col + matmul; the naive triple-loop definition it
must match lives in the test suite as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadLabelError, ShapeMismatchError

RNG_ALGORITHM = "PCG64"


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; same seed gives the same stream on any platform."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class Parameter:
    """Trainable tensor plus its gradient and momentum buffers (same shape)."""

    value: np.ndarray
    name: str = ""
    grad: np.ndarray = field(init=False)
    velocity: np.ndarray = field(init=False)

    def __post_init__(self):
        self.grad = np.zeros_like(self.value)
        self.velocity = np.zeros_like(self.value)


def _batched(x: np.ndarray, ndim: int):
    """Add a leading batch axis if x is a single sample of rank ndim."""
    if x.ndim == ndim:
        return x[None], True
    if x.ndim == ndim + 1:
        return x, False
    raise ShapeMismatchError(f"expected rank {ndim} or {ndim + 1}, got shape {x.shape}")


def _im2col(x: np.ndarray, m: int, r: int, s: int, v: int) -> np.ndarray:
    """(N, C, H, W) -> (N, C*m*r, H_out*W_out) patch matrix."""
    windows = np.lib.stride_tricks.sliding_window_view(x, (m, r), axis=(2, 3))
    windows = windows[:, :, ::s, ::v]  # (N, C, H_out, W_out, m, r)
    n, c, ho, wo = windows.shape[:4]
    return windows.transpose(0, 1, 4, 5, 2, 3).reshape(n, c * m * r, ho * wo)


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride=(1, 1)) -> np.ndarray:
    """Valid convolution: y[o,i,j] = b[o] + sum_{c,a,d} x[c, i*s+a, j*v+d] * w[o,c,a,d]."""
    xb, single = _batched(x, 3)
    s, v = stride
    c_out, c_in, m, r = w.shape
    _, c, h, wd = xb.shape
    if c != c_in:
        raise ShapeMismatchError(f"input channels {c} != kernel channels {c_in}")
    if h < m or wd < r:
        raise ShapeMismatchError(f"input {h}x{wd} smaller than kernel {m}x{r}")
    h_out = (h - m) // s + 1
    w_out = (wd - r) // v + 1
    cols = _im2col(xb, m, r, s, v)
    y = np.matmul(w.reshape(c_out, -1), cols) + b[:, None]
    y = y.reshape(xb.shape[0], c_out, h_out, w_out)
    return y[0] if single else y


def conv2d_backward(x: np.ndarray, w: np.ndarray, grad_y: np.ndarray, stride=(1, 1)):
    """Gradients of conv2d_forward: returns (grad_x, grad_w, grad_b)."""
    xb, single = _batched(x, 3)
    gyb, _ = _batched(grad_y, 3)
    s, v = stride
    c_out, c_in, m, r = w.shape
    n = xb.shape[0]
    h_out, w_out = gyb.shape[2], gyb.shape[3]

    gy2 = gyb.reshape(n, c_out, h_out * w_out)
    grad_b = gy2.sum(axis=(0, 2))

    cols = _im2col(xb, m, r, s, v)  # (N, K, L)
    grad_w = np.matmul(gy2, cols.transpose(0, 2, 1)).sum(axis=0).reshape(w.shape)

    # scatter columns back: one strided add per kernel tap
    gcols = np.matmul(w.reshape(c_out, -1).T, gy2)  # (N, K, L)
    gcols = gcols.reshape(n, c_in, m, r, h_out, w_out)
    grad_x = np.zeros_like(xb)
    for a in range(m):
        for d in range(r):
            grad_x[:, :, a : a + s * h_out : s, d : d + v * w_out : v] += gcols[:, :, a, d]

    if single:
        return grad_x[0], grad_w, grad_b
    return grad_x, grad_w, grad_b


def maxpool2d_forward(x: np.ndarray, p: int, q: int):
    """Non-overlapping p x q max pool with floor semantics.

    Returns (y, argmax) where argmax holds each window's flat row-major winner
    index (first maximal element on ties) for the backward routing.
    """
    xb, single = _batched(x, 3)
    n, c, h, w = xb.shape
    ho, wo = h // p, w // q
    cropped = xb[:, :, : ho * p, : wo * q]
    windows = cropped.reshape(n, c, ho, p, wo, q).transpose(0, 1, 2, 4, 3, 5)
    flat = windows.reshape(n, c, ho, wo, p * q)
    idx = flat.argmax(axis=-1)
    y = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
    if single:
        return y[0], idx[0]
    return y, idx


def maxpool2d_backward(idx: np.ndarray, x_shape, grad_y: np.ndarray, p: int, q: int) -> np.ndarray:
    """Route each window's upstream gradient to its stored argmax position."""
    gyb, single = _batched(grad_y, 3)
    idxb = idx[None] if single else idx
    n, c, ho, wo = gyb.shape
    flat = np.zeros((n, c, ho, wo, p * q), dtype=gyb.dtype)
    np.put_along_axis(flat, idxb[..., None], gyb[..., None], axis=-1)
    gx_crop = flat.reshape(n, c, ho, wo, p, q).transpose(0, 1, 2, 4, 3, 5)
    gx_crop = gx_crop.reshape(n, c, ho * p, wo * q)
    full_shape = (n,) + tuple(x_shape[-3:])
    gx = np.zeros(full_shape, dtype=gyb.dtype)
    gx[:, :, : ho * p, : wo * q] = gx_crop
    return gx[0] if single else gx


def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(x: np.ndarray, grad_y: np.ndarray) -> np.ndarray:
    # subgradient at exactly 0 is pinned to 0
    return grad_y * (x > 0)


def linear_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """y = w @ x + b for (D,) input, row-wise for (N, D) batches."""
    xb, single = _batched(x, 1)
    if xb.shape[1] != w.shape[1]:
        raise ShapeMismatchError(f"input dim {xb.shape[1]} != weight dim {w.shape[1]}")
    y = xb @ w.T + b
    return y[0] if single else y


def linear_backward(x: np.ndarray, w: np.ndarray, grad_y: np.ndarray):
    xb, single = _batched(x, 1)
    gyb, _ = _batched(grad_y, 1)
    grad_x = gyb @ w
    grad_w = gyb.T @ xb
    grad_b = gyb.sum(axis=0)
    if single:
        return grad_x[0], grad_w, grad_b
    return grad_x, grad_w, grad_b


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, labels):
    """Stable log-sum-exp loss and its logit gradient.

    Single sample: loss = logsumexp(logits) - logits[label],
    grad = softmax(logits) - onehot(label). Batches average the loss and
    scale the per-sample gradients by 1/N.
    """
    lb, single = _batched(logits, 1)
    yb = np.atleast_1d(np.asarray(labels))
    k = lb.shape[1]
    if np.any(yb < 0) or np.any(yb >= k):
        raise BadLabelError(f"labels must lie in [0, {k})")
    zmax = lb.max(axis=1, keepdims=True)
    z = lb - zmax
    lse = np.log(np.exp(z).sum(axis=1)) + zmax[:, 0]
    losses = lse - lb[np.arange(len(yb)), yb]
    probs = softmax(lb)
    grad = probs.copy()
    grad[np.arange(len(yb)), yb] -= 1.0
    if single:
        return float(losses[0]), grad[0]
    return float(losses.mean()), grad / len(yb)


def sgd_step(params, lr: float, momentum: float = 0.0) -> None:
    """velocity <- momentum*velocity + grad; value <- value - lr*velocity."""
    for p in params:
        p.velocity *= momentum
        p.velocity += p.grad
        p.value -= lr * p.velocity


def zero_grads(params) -> None:
    for p in params:
        p.grad[...] = 0


def truncated_normal_init(
    shape, std: float = 0.01, rng: np.random.Generator | None = None
) -> np.ndarray:
    """N(0, std^2) samples redrawn while |x| > 2*std."""
    if std <= 0:
        raise ValueError("std must be positive")
    if rng is None:
        rng = make_rng(0)
    out = rng.standard_normal(shape) * std
    bad = np.abs(out) > 2 * std
    while bad.any():
        out[bad] = rng.standard_normal(int(bad.sum())) * std
        bad = np.abs(out) > 2 * std
    return out
