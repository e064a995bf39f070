"""The two evaluated architectures, their multiply accounting, and checkpoints.

Both models consume a (101, 40) coefficient matrix as a single-channel image
(time x frequency) and emit 12 logits. Softmax is fused into the training loss
and applied explicitly only in predict().

Checkpoint format (little-endian): 8-byte magic ``KWSFORGE``, u32 version,
u32-length-prefixed UTF-8 JSON header (name, n_labels, seed, epoch,
val_accuracy), then each parameter in build order as u32 name length, name,
u32 rank, u32 dims, raw float32 payload. Load of a save is bit-exact.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from . import nn
from .errors import CorruptCheckpointError, ShapeMismatchError
from .labels import LABELS, N_LABELS, label_name

INPUT_SHAPE = (101, 40)

CHECKPOINT_MAGIC = b"KWSFORGE"
CHECKPOINT_VERSION = 1

MODEL_NAMES = ("cnn-trad-pool2", "cnn-one-fstride4")


@dataclass(frozen=True)
class ConvLayerSpec:
    """One conv stage: m x r kernel (time x frequency), n maps, p x q pool, s x v stride."""

    m: int
    r: int
    n: int
    p: int = 1
    q: int = 1
    s: int = 1
    v: int = 1


@dataclass(frozen=True)
class ModelSpec:
    name: str
    convs: tuple[ConvLayerSpec, ...]
    hidden: tuple[int, ...]
    n_labels: int = N_LABELS


def model_spec(name: str, n_labels: int = N_LABELS) -> ModelSpec:
    if name == "cnn-trad-pool2":
        return ModelSpec(
            name=name,
            convs=(
                ConvLayerSpec(m=20, r=8, n=64, p=2, q=2),
                ConvLayerSpec(m=10, r=4, n=64),
            ),
            hidden=(),
            n_labels=n_labels,
        )
    if name == "cnn-one-fstride4":
        return ModelSpec(
            name=name,
            convs=(ConvLayerSpec(m=INPUT_SHAPE[0], r=8, n=186),),
            hidden=(128, 128),
            n_labels=n_labels,
        )
    raise ValueError(f"unknown model {name!r} (expected one of {MODEL_NAMES})")


def layer_shapes(spec: ModelSpec, input_shape=INPUT_SHAPE) -> list[tuple[int, int, int]]:
    """Intermediate (channels, height, width) after each conv/pool stage."""
    c, h, w = 1, input_shape[0], input_shape[1]
    shapes = [(c, h, w)]
    for conv in spec.convs:
        if h < conv.m or w < conv.r:
            raise ShapeMismatchError(
                f"{spec.name}: {conv.m}x{conv.r} kernel does not fit {h}x{w} input"
            )
        h = (h - conv.m) // conv.s + 1
        w = (w - conv.r) // conv.v + 1
        c = conv.n
        h, w = h // conv.p, w // conv.q
        shapes.append((c, h, w))
    return shapes


@dataclass
class LayerCount:
    name: str
    multiplies: int


def count_multiplies(spec: ModelSpec, input_shape=INPUT_SHAPE) -> tuple[list[LayerCount], int]:
    """Per-layer and total multiply counts for one forward pass.

    Conv layers cost H_out*W_out*C_out*C_in*m*r, affine layers in_dim*out_dim.
    """
    counts = []
    c, h, w = 1, input_shape[0], input_shape[1]
    for i, conv in enumerate(spec.convs, start=1):
        h_out = (h - conv.m) // conv.s + 1
        w_out = (w - conv.r) // conv.v + 1
        counts.append(LayerCount(f"conv{i}", h_out * w_out * conv.n * c * conv.m * conv.r))
        c, h, w = conv.n, h_out // conv.p, w_out // conv.q
    dim = c * h * w
    for i, units in enumerate(spec.hidden, start=1):
        counts.append(LayerCount(f"hidden{i}", dim * units))
        dim = units
    counts.append(LayerCount("output", dim * spec.n_labels))
    return counts, sum(lc.multiplies for lc in counts)


class _Conv2d:
    def __init__(self, spec: ConvLayerSpec, c_in: int, index: int, rng):
        self.spec = spec
        self.w = nn.Parameter(
            nn.truncated_normal_init((spec.n, c_in, spec.m, spec.r), rng=rng).astype(np.float32),
            name=f"conv{index}.w",
        )
        self.b = nn.Parameter(np.zeros(spec.n, dtype=np.float32), name=f"conv{index}.b")
        self._x = None

    def params(self):
        return [self.w, self.b]

    def forward(self, x, train=False):
        if train:
            self._x = x
        return nn.conv2d_forward(x, self.w.value, self.b.value, (self.spec.s, self.spec.v))

    def backward(self, grad_y):
        gx, gw, gb = nn.conv2d_backward(self._x, self.w.value, grad_y, (self.spec.s, self.spec.v))
        self.w.grad += gw
        self.b.grad += gb
        return gx


class _MaxPool2d:
    def __init__(self, p: int, q: int):
        self.p, self.q = p, q
        self._idx = None
        self._x_shape = None

    def params(self):
        return []

    def forward(self, x, train=False):
        y, idx = nn.maxpool2d_forward(x, self.p, self.q)
        if train:
            self._idx, self._x_shape = idx, x.shape
        return y

    def backward(self, grad_y):
        return nn.maxpool2d_backward(self._idx, self._x_shape, grad_y, self.p, self.q)


class _ReLU:
    def __init__(self):
        self._x = None

    def params(self):
        return []

    def forward(self, x, train=False):
        if train:
            self._x = x
        return nn.relu_forward(x)

    def backward(self, grad_y):
        return nn.relu_backward(self._x, grad_y)


class _Flatten:
    def __init__(self):
        self._shape = None

    def params(self):
        return []

    def forward(self, x, train=False):
        if train:
            self._shape = x.shape
        if x.ndim == 3:
            return x.reshape(-1)
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_y):
        return grad_y.reshape(self._shape)


class _Linear:
    def __init__(self, in_dim: int, out_dim: int, name: str, rng):
        self.w = nn.Parameter(
            nn.truncated_normal_init((out_dim, in_dim), rng=rng).astype(np.float32),
            name=f"{name}.w",
        )
        self.b = nn.Parameter(np.zeros(out_dim, dtype=np.float32), name=f"{name}.b")
        self._x = None

    def params(self):
        return [self.w, self.b]

    def forward(self, x, train=False):
        if train:
            self._x = x
        return nn.linear_forward(x, self.w.value, self.b.value)

    def backward(self, grad_y):
        gx, gw, gb = nn.linear_backward(self._x, self.w.value, grad_y)
        self.w.grad += gw
        self.b.grad += gb
        return gx


class Model:
    """Fixed layer stack built from a ModelSpec; backward runs in reverse order."""

    def __init__(self, spec: ModelSpec, rng):
        self.spec = spec
        shapes = layer_shapes(spec)  # validates the chain
        self.layers = []
        c_in = 1
        for i, conv in enumerate(spec.convs, start=1):
            self.layers.append(_Conv2d(conv, c_in, i, rng))
            self.layers.append(_ReLU())
            if conv.p > 1 or conv.q > 1:
                self.layers.append(_MaxPool2d(conv.p, conv.q))
            c_in = conv.n
        self.layers.append(_Flatten())
        dim = int(np.prod(shapes[-1]))
        for i, units in enumerate(spec.hidden, start=1):
            self.layers.append(_Linear(dim, units, f"hidden{i}", rng))
            self.layers.append(_ReLU())
            dim = units
        self.layers.append(_Linear(dim, spec.n_labels, "output", rng))

    def parameters(self) -> list[nn.Parameter]:
        return [p for layer in self.layers for p in layer.params()]

    def forward(self, features: np.ndarray, train: bool = False) -> np.ndarray:
        """(101, 40) -> (n_labels,) logits, or (N, 101, 40) -> (N, n_labels)."""
        if features.ndim == 2:
            x = features.astype(np.float32, copy=False)[None, :, :]
        elif features.ndim == 3:
            x = features.astype(np.float32, copy=False)[:, None, :, :]
        else:
            raise ShapeMismatchError(f"expected (101, 40) or (N, 101, 40), got {features.shape}")
        if x.shape[-2:] != INPUT_SHAPE:
            raise ShapeMismatchError(f"expected {INPUT_SHAPE} input, got {x.shape[-2:]}")
        for layer in self.layers:
            x = layer.forward(x, train=train)
        return x

    def backward(self, grad_logits: np.ndarray) -> None:
        g = grad_logits.astype(np.float32, copy=False)
        for layer in reversed(self.layers):
            g = layer.backward(g)

    def state(self) -> list[np.ndarray]:
        return [p.value.copy() for p in self.parameters()]

    def load_state(self, arrays) -> None:
        for p, a in zip(self.parameters(), arrays, strict=True):
            if p.value.shape != a.shape:
                raise ShapeMismatchError(f"{p.name}: expected {p.value.shape}, got {a.shape}")
            p.value[...] = a


def build_model(name: str, n_labels: int = N_LABELS, rng=None) -> Model:
    if rng is None:
        rng = nn.make_rng(0)
    return Model(model_spec(name, n_labels), rng)


def build_cnn_trad_pool2(n_labels: int = N_LABELS, rng=None) -> Model:
    return build_model("cnn-trad-pool2", n_labels, rng)


def build_cnn_one_fstride4(n_labels: int = N_LABELS, rng=None) -> Model:
    return build_model("cnn-one-fstride4", n_labels, rng)


def forward(model: Model, features: np.ndarray) -> np.ndarray:
    """Inference logits; deterministic, never mutates the model."""
    return model.forward(features, train=False)


def predict(model: Model, features: np.ndarray) -> tuple[str, np.ndarray]:
    """(label, softmax scores); argmax ties resolve to the lowest class index."""
    logits = forward(model, features)
    scores = nn.softmax(logits.astype(np.float64))
    return label_name(int(np.argmax(scores))), scores


@dataclass
class Checkpoint:
    """A model together with the run metadata that produced it."""

    model: Model
    seed: int = 0
    epoch: int = 0
    val_accuracy: float = float("nan")

    @property
    def labels(self) -> tuple[str, ...]:
        return LABELS[: self.model.spec.n_labels]


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    header = json.dumps(
        {
            "name": ckpt.model.spec.name,
            "n_labels": ckpt.model.spec.n_labels,
            "seed": ckpt.seed,
            "epoch": ckpt.epoch,
            "val_accuracy": None if np.isnan(ckpt.val_accuracy) else ckpt.val_accuracy,
        }
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for p in ckpt.model.parameters():
            name = p.name.encode("utf-8")
            fh.write(struct.pack("<I", len(name)))
            fh.write(name)
            fh.write(struct.pack("<I", p.value.ndim))
            fh.write(struct.pack(f"<{p.value.ndim}I", *p.value.shape))
            fh.write(np.ascontiguousarray(p.value, dtype="<f4").tobytes())


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CorruptCheckpointError(f"truncated while reading {what}")
    return data


def load_checkpoint(path) -> Checkpoint:
    """Rebuild the model named in the header and validate every parameter against it."""
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 8, "magic")
        if magic != CHECKPOINT_MAGIC:
            raise CorruptCheckpointError(f"bad magic {magic!r}")
        (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
        if version != CHECKPOINT_VERSION:
            raise CorruptCheckpointError(f"unsupported version {version}")
        (hlen,) = struct.unpack("<I", _read_exact(fh, 4, "header length"))
        try:
            header = json.loads(_read_exact(fh, hlen, "header"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise CorruptCheckpointError(f"unreadable header: {e}") from e
        try:
            model = build_model(header["name"], header["n_labels"], nn.make_rng(0))
        except (KeyError, ValueError) as e:
            raise CorruptCheckpointError(f"bad header fields: {e}") from e

        for p in model.parameters():
            (nlen,) = struct.unpack("<I", _read_exact(fh, 4, "parameter name length"))
            name = _read_exact(fh, nlen, "parameter name").decode("utf-8")
            if name != p.name:
                raise CorruptCheckpointError(f"expected parameter {p.name!r}, found {name!r}")
            (rank,) = struct.unpack("<I", _read_exact(fh, 4, f"{name} rank"))
            dims = struct.unpack(f"<{rank}I", _read_exact(fh, 4 * rank, f"{name} dims"))
            if dims != p.value.shape:
                raise CorruptCheckpointError(
                    f"{name}: shape {dims} does not match spec shape {p.value.shape}"
                )
            payload = _read_exact(fh, 4 * int(np.prod(dims)), f"{name} payload")
            p.value[...] = np.frombuffer(payload, dtype="<f4").reshape(dims)
        if fh.read(1):
            raise CorruptCheckpointError("trailing bytes after last parameter")

    va = header.get("val_accuracy")
    return Checkpoint(
        model=model,
        seed=int(header.get("seed", 0)),
        epoch=int(header.get("epoch", 0)),
        val_accuracy=float("nan") if va is None else float(va),
    )
