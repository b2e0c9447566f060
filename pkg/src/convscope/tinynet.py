"""Desk-scale CNN evaluator used to mint snapshot fixtures.

Supports single-channel-per-neuron conv stacks with ReLU, 2x2 max pooling,
fully-connected layers, a softmax or identity output head, cross-entropy or
two-class hinge loss, exact analytic gradients, and export of the whole
state as a snapshot document. Nets are tiny on purpose; everything is plain
float64 numpy so evaluations are bit-reproducible.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import EmptyClass, MappingMismatch, NonDivisibleDims, WindowTooLarge
from .snapshot import Layer, NetworkSnapshot, PatchRef, WeightedEdge, group_layers


class ProbabilityClampWarning(UserWarning):
    """A zero probability was clamped before taking its log."""


# --- primitive ops ---------------------------------------------------------


def convolve(grid: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Valid-padding stride-1 correlation of a 2-D grid with a window.

    Output[(i, j)] is the dot product of the window with the aligned patch;
    the window is not flipped.
    """
    grid = np.asarray(grid, dtype=np.float64)
    window = np.asarray(window, dtype=np.float64)
    kh, kw = window.shape
    h, w = grid.shape
    if kh > h or kw > w:
        raise WindowTooLarge(f"window {window.shape} exceeds grid {grid.shape}")
    view = sliding_window_view(grid, (kh, kw))
    return np.einsum("xyuv,uv->xy", view, window)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def max_pool(x: np.ndarray) -> np.ndarray:
    """2x2 non-overlapping max pooling over the trailing two axes."""
    x = np.asarray(x, dtype=np.float64)
    h, w = x.shape[-2:]
    if h % 2 or w % 2:
        raise NonDivisibleDims(f"pooling input {h}x{w} is not divisible by 2")
    windows = x.reshape(*x.shape[:-2], h // 2, 2, w // 2, 2)
    return windows.max(axis=(-3, -1))


def softmax(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    shifted = np.exp(x - x.max())
    return shifted / shifted.sum()


def cross_entropy(probs: np.ndarray, target: int) -> float:
    """Cross-entropy against a one-hot target given output probabilities.

    Zero probabilities are clamped to 1e-300 (with a warning) so the log
    stays finite.
    """
    p = float(np.asarray(probs, dtype=np.float64)[target])
    if p <= 0.0:
        warnings.warn("clamped zero probability in cross-entropy", ProbabilityClampWarning)
        p = 1e-300
    return -float(np.log(p))


def hinge(score: float, t: int) -> float:
    """Two-class hinge loss, t in {-1, +1}."""
    if t not in (-1, 1):
        raise ValueError(f"hinge target must be -1 or +1, got {t}")
    return max(0.0, 1.0 - t * float(score))


# --- layer specs -----------------------------------------------------------


@dataclass
class ConvSpec:
    name: str
    weights: np.ndarray  # (in_ch, out_ch, kh, kw)

    kind = "conv"


@dataclass
class ReluSpec:
    name: str

    kind = "activation"


@dataclass
class PoolSpec:
    name: str

    kind = "pooling"


@dataclass
class NormSpec:
    """Placeholder normalization layer; evaluates as identity."""

    name: str

    kind = "normalization"


@dataclass
class DenseSpec:
    name: str
    weights: np.ndarray  # (out_units, in_features) over channel-major flattening

    kind = "fully-connected"


@dataclass
class OutputSpec:
    name: str
    activation: str  # 'softmax' | 'identity'

    kind = "output"


WEIGHTED_KINDS = ("conv", "fully-connected")


@dataclass
class TinyNet:
    """A validated layer chain with a loss.

    `input_shape` is (h, w); the single input channel feeds the first conv.
    Cross-entropy requires a softmax output over len(classes) units, hinge
    requires an identity output with one unit and exactly two classes
    (class index 0 maps to t=+1, index 1 to t=-1).
    """

    input_shape: tuple[int, int]
    specs: list
    loss: str
    classes: tuple[str, ...]
    shapes: dict[str, tuple] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.loss not in ("cross-entropy", "hinge"):
            raise ValueError(f"unknown loss {self.loss!r}")
        names = [s.name for s in self.specs]
        if len(set(names)) != len(names):
            raise ValueError("duplicate layer names")
        shape: tuple = (1, *self.input_shape)  # (channels, h, w)
        flat = None
        for spec in self.specs:
            if isinstance(spec, ConvSpec):
                if flat is not None:
                    raise ValueError(f"conv layer {spec.name!r} after flattening")
                ic, oc, kh, kw = spec.weights.shape
                if ic != shape[0]:
                    raise ValueError(
                        f"conv {spec.name!r} expects {ic} input channels, got {shape[0]}"
                    )
                if kh > shape[1] or kw > shape[2]:
                    raise WindowTooLarge(
                        f"conv {spec.name!r} window {kh}x{kw} exceeds input {shape[1]}x{shape[2]}"
                    )
                shape = (oc, shape[1] - kh + 1, shape[2] - kw + 1)
            elif isinstance(spec, PoolSpec):
                if flat is not None:
                    raise ValueError(f"pooling layer {spec.name!r} after flattening")
                if shape[1] % 2 or shape[2] % 2:
                    raise NonDivisibleDims(
                        f"pool {spec.name!r} input {shape[1]}x{shape[2]} is not divisible by 2"
                    )
                shape = (shape[0], shape[1] // 2, shape[2] // 2)
            elif isinstance(spec, (ReluSpec, NormSpec)):
                pass
            elif isinstance(spec, DenseSpec):
                out, n_in = spec.weights.shape
                expect = flat if flat is not None else int(np.prod(shape))
                if n_in != expect:
                    raise ValueError(
                        f"dense {spec.name!r} expects {n_in} inputs, feature size is {expect}"
                    )
                if flat is None:
                    self.shapes[spec.name + "/pre-flatten"] = shape
                flat = out
                shape = (out,)
            elif isinstance(spec, OutputSpec):
                if flat is None:
                    raise ValueError("output layer must follow a dense layer")
                if spec is not self.specs[-1]:
                    raise ValueError("output layer must be last")
                if spec.activation not in ("softmax", "identity"):
                    raise ValueError(f"unknown output activation {spec.activation!r}")
            else:
                raise TypeError(f"unknown spec {spec!r}")
            self.shapes[spec.name] = shape

        last = self.specs[-1]
        if not isinstance(last, OutputSpec):
            raise ValueError("net must end with an output layer")
        if self.loss == "cross-entropy":
            if last.activation != "softmax":
                raise ValueError("cross-entropy requires a softmax output")
            if self.shapes[last.name][0] != len(self.classes):
                raise ValueError("softmax width must equal the class count")
        else:
            if last.activation != "identity":
                raise ValueError("hinge requires an identity output")
            if self.shapes[last.name][0] != 1 or len(self.classes) != 2:
                raise ValueError("hinge requires one output unit and exactly two classes")

    def n_weights(self) -> int:
        return sum(s.weights.size for s in self.specs if hasattr(s, "weights"))


def hinge_target(label: int) -> int:
    return 1 if label == 0 else -1


# --- evaluation ------------------------------------------------------------


def forward(net: TinyNet, image: np.ndarray) -> dict[str, np.ndarray]:
    """Evaluate one image; returns every layer's raw output by name."""
    x = np.asarray(image, dtype=np.float64)
    if x.shape != net.input_shape:
        raise ValueError(f"image shape {x.shape} does not match {net.input_shape}")
    x = x[None, :, :]
    outputs: dict[str, np.ndarray] = {}
    for spec in net.specs:
        if isinstance(spec, ConvSpec):
            view = sliding_window_view(x, spec.weights.shape[2:], axis=(1, 2))
            x = np.einsum("ixyuv,iouv->oxy", view, spec.weights)
        elif isinstance(spec, ReluSpec):
            x = np.maximum(x, 0.0)
        elif isinstance(spec, PoolSpec):
            x = max_pool(x)
        elif isinstance(spec, NormSpec):
            x = x.copy()
        elif isinstance(spec, DenseSpec):
            x = spec.weights @ x.ravel()
        elif isinstance(spec, OutputSpec):
            x = softmax(x) if spec.activation == "softmax" else x.copy()
        outputs[spec.name] = x
    return outputs


def loss_value(net: TinyNet, image: np.ndarray, label: int) -> float:
    outputs = forward(net, image)
    final = outputs[net.specs[-1].name]
    if net.loss == "cross-entropy":
        return cross_entropy(final, label)
    return hinge(final[0], hinge_target(label))


def backward(net: TinyNet, image: np.ndarray, label: int) -> tuple[dict[str, np.ndarray], float]:
    """Analytic loss gradients for every weighted layer, plus the loss."""
    outputs = forward(net, image)
    inputs: dict[str, np.ndarray] = {}
    x = np.asarray(image, dtype=np.float64)[None, :, :]
    for spec in net.specs:
        inputs[spec.name] = x
        x = outputs[spec.name]

    final = outputs[net.specs[-1].name]
    if net.loss == "cross-entropy":
        loss = cross_entropy(final, label)
        delta = final.copy()
        delta[label] -= 1.0  # softmax + cross-entropy combined gradient
    else:
        t = hinge_target(label)
        loss = hinge(final[0], t)
        delta = np.array([-float(t)]) if 1.0 - t * final[0] > 0.0 else np.zeros(1)

    grads: dict[str, np.ndarray] = {}
    for spec in reversed(net.specs):
        x_in = inputs[spec.name]
        if isinstance(spec, OutputSpec):
            if spec.activation == "softmax":
                pass  # folded into the combined delta above
        elif isinstance(spec, DenseSpec):
            grads[spec.name] = np.outer(delta, x_in.ravel())
            delta = (spec.weights.T @ delta).reshape(x_in.shape)
        elif isinstance(spec, NormSpec):
            pass
        elif isinstance(spec, ReluSpec):
            delta = delta * (outputs[spec.name] > 0.0)
        elif isinstance(spec, PoolSpec):
            c, h, w = x_in.shape
            windows = x_in.reshape(c, h // 2, 2, w // 2, 2).transpose(0, 1, 3, 2, 4)
            flat = windows.reshape(c, h // 2, w // 2, 4)
            arg = flat.argmax(axis=-1)  # ties go to the first maximum
            scatter = np.zeros_like(flat)
            ci, hi, wi = np.indices(arg.shape)
            scatter[ci, hi, wi, arg] = delta
            delta = (
                scatter.reshape(c, h // 2, w // 2, 2, 2)
                .transpose(0, 1, 3, 2, 4)
                .reshape(c, h, w)
            )
        elif isinstance(spec, ConvSpec):
            ic, oc, kh, kw = spec.weights.shape
            view = sliding_window_view(x_in, (kh, kw), axis=(1, 2))
            grads[spec.name] = np.einsum("oxy,ixyuv->iouv", delta, view)
            padded = np.pad(delta, ((0, 0), (kh - 1, kh - 1), (kw - 1, kw - 1)))
            dview = sliding_window_view(padded, (kh, kw), axis=(1, 2))
            delta = np.einsum("oxyuv,iouv->ixy", dview, spec.weights[:, :, ::-1, ::-1])
    return grads, loss


def finite_difference(net: TinyNet, image: np.ndarray, label: int, h: float = 1e-6) -> dict[str, np.ndarray]:
    """Central finite-difference gradients; the independent check on backward."""
    grads: dict[str, np.ndarray] = {}
    for spec in net.specs:
        if not hasattr(spec, "weights"):
            continue
        w = spec.weights
        g = np.zeros_like(w)
        flat = w.ravel()
        gflat = g.ravel()
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + h
            up = loss_value(net, image, label)
            flat[i] = keep - h
            down = loss_value(net, image, label)
            flat[i] = keep
            gflat[i] = (up - down) / (2.0 * h)
        grads[spec.name] = g
    return grads


# --- per-neuron scalars and snapshot export --------------------------------


def neuron_scalars(net: TinyNet, outputs: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Collapse each layer output to one scalar per neuron.

    Spatial layers use the channel mean; dense and output layers are already
    one value per unit.
    """
    result = {}
    for spec in net.specs:
        out = outputs[spec.name]
        result[spec.name] = out.mean(axis=(1, 2)) if out.ndim == 3 else out
    return result


def _entry_weighted_spec(net: TinyNet, member_names: tuple[str, ...]):
    by_name = {s.name: s for s in net.specs}
    entry = None
    for name in member_names:
        spec = by_name[name]
        if hasattr(spec, "weights"):
            if entry is None:
                entry = spec
            else:
                raise MappingMismatch(
                    f"group {list(member_names)} has more than one weighted layer; "
                    "snapshot edges need a 1-1 channel mapping"
                )
    if entry is None:
        raise MappingMismatch(f"group {list(member_names)} has no weighted layer")
    return entry


def _aggregate_block(net: TinyNet, spec, values: np.ndarray) -> np.ndarray:
    """Collapse a weighted layer's (or its gradient's) array to (n_in, n_out).

    Conv kernels aggregate by window mean; dense weights by the mean over the
    spatial positions of each source channel (a plain transpose when the
    input was already flat).
    """
    if isinstance(spec, ConvSpec):
        return values.mean(axis=(2, 3))
    pre = net.shapes.get(spec.name + "/pre-flatten")
    if pre is None:
        return values.T
    return values.reshape(values.shape[0], pre[0], -1).mean(axis=2).T


def _edge_blocks(net: TinyNet) -> list[tuple[str, np.ndarray]]:
    """Per display-layer gap: (entry spec name, (n_in, n_out) aggregate weights)."""
    layers = emitted_layers(net)
    groups = group_layers(layers)
    n_of = {l.name: len(l.neurons) for l in layers}
    blocks = []
    for g in range(1, len(groups)):
        entry = _entry_weighted_spec(net, groups[g].member_layers)
        agg = _aggregate_block(net, entry, entry.weights)
        n_src = n_of[groups[g - 1].display_layer]
        n_tgt = n_of[groups[g].display_layer]
        if agg.shape != (n_src, n_tgt):
            raise MappingMismatch(
                f"gap {g}: aggregate weight block {agg.shape} does not map display "
                f"neurons ({n_src} -> {n_tgt})"
            )
        blocks.append((entry.name, agg))
    return blocks


def emitted_layers(net: TinyNet) -> tuple[Layer, ...]:
    out = []
    for spec in net.specs:
        shape = net.shapes[spec.name]
        n = shape[0]
        out.append(Layer(spec.name, spec.kind, tuple(f"{spec.name}.{i}" for i in range(n))))
    return tuple(out)


def emit_snapshot(
    net: TinyNet,
    dataset: list[tuple[np.ndarray, int]],
    snapshot_id: str = "fixture",
    include_gradients: bool = True,
    include_prev_weights: bool = True,
    learning_rate: float = 0.1,
    include_patches: bool = True,
    patch_pixels: bool = False,
) -> NetworkSnapshot:
    """Evaluate the dataset and package the net as a snapshot.

    Activations are per-class means of per-sample neuron scalars. Gradients
    are dataset-mean loss gradients aggregated per edge exactly like the
    weights; prev_weights are w + learning_rate * gradient, emulating the
    state one step earlier. Patches keep the top-5 images per display-layer
    neuron by activation score (ties by image id).
    """
    from .clustering import average_activation

    if not dataset:
        raise EmptyClass("dataset is empty")
    labels = np.array([label for _, label in dataset])
    m = len(net.classes)
    for c in range(m):
        if not np.any(labels == c):
            raise EmptyClass(f"class {net.classes[c]!r} has no samples")

    layers = emitted_layers(net)
    groups = group_layers(layers)
    neuron_ids = [n for l in layers for n in l.neurons]

    per_sample = np.zeros((len(neuron_ids), len(dataset)))
    grad_sum: dict[str, np.ndarray] = {}
    for j, (image, label) in enumerate(dataset):
        if include_gradients or include_prev_weights:
            grads, _ = backward(net, image, label)
            for name, g in grads.items():
                grad_sum[name] = grad_sum.get(name, 0.0) + g
        outputs = forward(net, image)
        scalars = neuron_scalars(net, outputs)
        per_sample[:, j] = np.concatenate([scalars[l.name] for l in layers])

    activation_table = average_activation(per_sample, labels, m)
    activations = {n: activation_table[i] for i, n in enumerate(neuron_ids)}

    grad_mean = {name: g / len(dataset) for name, g in grad_sum.items()}

    edges = []
    gradients: dict[str, float] = {}
    prev_weights: dict[str, float] = {}
    blocks = _edge_blocks(net)
    for g, (entry_name, agg) in enumerate(blocks):
        src = layers[[l.name for l in layers].index(groups[g].display_layer)].neurons
        tgt = layers[[l.name for l in layers].index(groups[g + 1].display_layer)].neurons
        grad_agg = None
        if grad_mean:
            spec = {s.name: s for s in net.specs}[entry_name]
            grad_agg = _aggregate_block(net, spec, grad_mean[entry_name])
        for i, s_id in enumerate(src):
            for o, t_id in enumerate(tgt):
                eid = f"e{g}:{i}:{o}"
                edges.append(WeightedEdge(eid, s_id, t_id, float(agg[i, o])))
                if grad_agg is not None:
                    gradients[eid] = float(grad_agg[i, o])
                    prev_weights[eid] = float(agg[i, o] + learning_rate * grad_agg[i, o])

    patches = None
    if include_patches:
        patches = {}
        display = set(g.display_layer for g in groups)
        offset = 0
        for layer in layers:
            n = len(layer.neurons)
            if layer.name in display:
                for i, nid in enumerate(layer.neurons):
                    row = per_sample[offset + i]
                    ranked = sorted(range(len(dataset)), key=lambda j: (-row[j], f"img{j:03d}"))
                    refs = []
                    for j in ranked[:5]:
                        pixels = None
                        if patch_pixels:
                            pixels = tuple(tuple(map(float, r)) for r in dataset[j][0])
                        refs.append(PatchRef(f"img{j:03d}", float(row[j]), pixels))
                    patches[nid] = tuple(refs)
            offset += n

    return NetworkSnapshot(
        id=snapshot_id,
        layers=layers,
        edges=tuple(edges),
        classes=net.classes,
        activations=activations,
        gradients=gradients if include_gradients else None,
        prev_weights=prev_weights if include_prev_weights else None,
        patches=patches,
    )


# --- generators ------------------------------------------------------------


def _conv_plan(side: int, n_groups: int) -> list[int]:
    """Kernel size per group so each conv output stays divisible by the pool."""
    ks = []
    for _ in range(n_groups):
        if side < 3:
            raise ValueError(f"input side too small for {n_groups} conv groups")
        k = 3 if side % 2 == 0 else 2
        side = (side - k + 1) // 2
        ks.append(k)
    return ks


def fixture_net(
    seed: int = 0,
    conv_channels: tuple[int, ...] = (16, 16, 16),
    input_side: int = 18,
    n_classes: int = 10,
    loss: str = "cross-entropy",
    scale: float = 0.9,
) -> TinyNet:
    """A healthy random net: [conv, relu, pool] per group, then FC + output."""
    rng = np.random.default_rng(seed)
    ks = _conv_plan(input_side, len(conv_channels))
    specs = []
    in_ch, side = 1, input_side
    for g, (oc, k) in enumerate(zip(conv_channels, ks), start=1):
        w = rng.normal(0.0, scale / np.sqrt(in_ch * k * k), size=(in_ch, oc, k, k))
        specs.append(ConvSpec(f"conv{g}", w))
        specs.append(ReluSpec(f"relu{g}"))
        specs.append(PoolSpec(f"pool{g}"))
        in_ch, side = oc, (side - k + 1) // 2
    n_out = 1 if loss == "hinge" else n_classes
    n_features = in_ch * side * side
    w = rng.normal(0.0, scale / np.sqrt(n_features), size=(n_out, n_features))
    specs.append(DenseSpec("fc1", w))
    specs.append(OutputSpec("out", "identity" if loss == "hinge" else "softmax"))
    classes = tuple(f"c{i}" for i in range(2 if loss == "hinge" else n_classes))
    return TinyNet((input_side, input_side), specs, loss, classes)


# dead-ReLU construction constants: alive fractions and scale boosts tuned so
# the relative-change series collapses beyond the first dead layer while some
# gradient still reaches the early layers.
_DEAD_ALIVE_FRACTION = 0.08
_DEAD_MARGIN = 0.05
_FC_BOOST = 12.0
_OUT_BOOST = 40.0


def dead_relu_net(
    seed: int = 0,
    conv_channels: tuple[int, ...] = (32, 32, 32),
    dense_units: int = 32,
    input_side: int = 18,
) -> TinyNet:
    """A hinge-loss net whose third conv group and FC layer are mostly dead.

    Dead channels get strictly negative incoming weights, so with
    non-negative inputs their ReLU output is identically zero. The few alive
    channels keep a weak gradient path to the early layers.
    """
    rng = np.random.default_rng(seed)
    ks = _conv_plan(input_side, len(conv_channels))
    specs = []
    in_ch, side = 1, input_side
    for g, (oc, k) in enumerate(zip(conv_channels, ks), start=1):
        sigma = 0.9 / np.sqrt(in_ch * k * k)
        w = rng.normal(0.0, sigma, size=(in_ch, oc, k, k))
        if g >= 3:
            alive = max(1, int(round(_DEAD_ALIVE_FRACTION * oc)))
            dead = np.arange(alive, oc)
            w[:, dead] = -(np.abs(w[:, dead]) + _DEAD_MARGIN)
            w[:, :alive] = np.abs(w[:, :alive]) * 0.5
        specs.append(ConvSpec(f"conv{g}", w))
        specs.append(ReluSpec(f"relu{g}"))
        specs.append(PoolSpec(f"pool{g}"))
        in_ch, side = oc, (side - k + 1) // 2
    n_features = in_ch * side * side
    sigma = 1.0 / np.sqrt(n_features)
    w = rng.normal(0.0, sigma, size=(dense_units, n_features))
    alive = max(1, int(round(_DEAD_ALIVE_FRACTION * dense_units)))
    w[alive:] = -(np.abs(w[alive:]) + _DEAD_MARGIN)
    w[:alive] = np.abs(w[:alive]) * _FC_BOOST
    specs.append(DenseSpec("fc1", w))
    specs.append(ReluSpec("relu_fc1"))
    w_out = rng.normal(0.0, _OUT_BOOST / np.sqrt(dense_units), size=(1, dense_units))
    specs.append(DenseSpec("fc2", w_out))
    specs.append(OutputSpec("out", "identity"))
    return TinyNet((input_side, input_side), specs, "hinge", ("c0", "c1"))


def make_dataset(
    net: TinyNet, images_per_class: int = 4, seed: int = 0
) -> list[tuple[np.ndarray, int]]:
    """Non-negative random images, per-class shifted so classes differ."""
    rng = np.random.default_rng(seed)
    h, w = net.input_shape
    data = []
    m = len(net.classes)
    for c in range(m):
        base = rng.uniform(0.0, 1.0, size=(h, w))
        for _ in range(images_per_class):
            img = np.clip(base + rng.uniform(-0.3, 0.3, size=(h, w)), 0.0, None)
            data.append((img, c))
    return data


def random_net(seed: int, max_weights: int = 500) -> TinyNet:
    """Small random net for gradient checks; weight count stays under the cap."""
    rng = np.random.default_rng(seed)
    loss = "hinge" if rng.random() < 0.4 else "cross-entropy"
    n_classes = 2 if loss == "hinge" else int(rng.integers(2, 5))
    while True:
        n_groups = int(rng.integers(1, 3))
        side = int(rng.choice([6, 8, 10] if n_groups == 2 else [4, 6, 8]))
        channels = tuple(int(rng.integers(1, 4)) for _ in range(n_groups))
        try:
            _conv_plan(side, n_groups)
        except ValueError:
            continue
        net = fixture_net(
            seed=int(rng.integers(0, 2**31)),
            conv_channels=channels,
            input_side=side,
            n_classes=n_classes,
            loss=loss,
            scale=0.8,
        )
        if net.n_weights() <= max_weights:
            return net
