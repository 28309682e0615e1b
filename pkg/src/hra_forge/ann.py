"""Small feedforward regressor mapping normalized PSF vectors to HEP.

One hidden layer, logistic squashing on hidden and output units (the output
squash keeps every prediction a valid probability), trained by full-batch
gradient descent on mean squared error. Because random initialization gives
the tiny network visibly different fits, training is replicated from several
seeds and the ensemble predicts with the arithmetic mean of its members'
outputs. Averaging weights instead would be meaningless: hidden units can be
permuted freely, so weight vectors from different runs do not correspond.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, NumericalError, TrainingDivergedError
from .ioutil import atomic_write_text, fmt_full
from .psf import PsfId

#: Epoch window for the plateau stopping rule: training stops when the loss
#: improvement over this many epochs falls below the configured tolerance.
PLATEAU_WINDOW = 100

_PREDICTOR_MAGIC = "hra-forge predictor v1"


@dataclass(frozen=True)
class Topology:
    """Layer sizes: inputs = active PSFs, one output, hidden defaults to inputs."""

    n_inputs: int
    n_hidden: int
    n_outputs: int = 1

    def __post_init__(self):
        if self.n_inputs < 1 or self.n_hidden < 1:
            raise InputError("topology layer sizes must be >= 1")
        if self.n_outputs != 1:
            raise InputError("only single-output networks are supported")


def default_topology(n_inputs: int, n_hidden: Optional[int] = None) -> Topology:
    """Hidden-layer width equals the input count unless overridden."""
    return Topology(n_inputs, n_inputs if n_hidden is None else n_hidden)


@dataclass(frozen=True)
class WeightSet:
    """All network parameters. Arrays are read-only after construction."""

    w_hidden: np.ndarray  # (n_hidden, n_inputs)
    b_hidden: np.ndarray  # (n_hidden,)
    w_output: np.ndarray  # (n_hidden,)
    b_output: float

    def __post_init__(self):
        w1 = np.asarray(self.w_hidden, dtype=float)
        b1 = np.asarray(self.b_hidden, dtype=float)
        w2 = np.asarray(self.w_output, dtype=float)
        if w1.ndim != 2 or b1.shape != (w1.shape[0],) or w2.shape != (w1.shape[0],):
            raise InputError("weight array shapes are inconsistent")
        if not (np.isfinite(w1).all() and np.isfinite(b1).all()
                and np.isfinite(w2).all() and np.isfinite(self.b_output)):
            raise InputError("weights must be finite")
        for arr in (w1, b1, w2):
            arr.setflags(write=False)
        object.__setattr__(self, "w_hidden", w1)
        object.__setattr__(self, "b_hidden", b1)
        object.__setattr__(self, "w_output", w2)
        object.__setattr__(self, "b_output", float(self.b_output))

    @property
    def topology(self) -> Topology:
        return Topology(self.w_hidden.shape[1], self.w_hidden.shape[0])


@dataclass(frozen=True)
class TrainingConfig:
    """Knobs for one training campaign.

    ``loss_tolerance`` feeds the plateau rule: stop once the loss improves by
    less than this over PLATEAU_WINDOW epochs. ``hidden_nodes`` overrides the
    hidden-equals-inputs default when set.
    """

    seed: int = 1
    max_epochs: int = 50000
    learning_rate: float = 2.0
    loss_tolerance: float = 1e-6
    n_replications: int = 10
    hidden_nodes: Optional[int] = None

    def __post_init__(self):
        if self.max_epochs < 1:
            raise InputError("max_epochs must be >= 1")
        if not self.learning_rate > 0:
            raise InputError("learning_rate must be positive")
        if not self.loss_tolerance > 0:
            raise InputError("loss_tolerance must be positive")
        if self.n_replications < 1:
            raise InputError("n_replications must be >= 1")
        if self.hidden_nodes is not None and self.hidden_nodes < 1:
            raise InputError("hidden_nodes must be >= 1")


@dataclass(frozen=True)
class EnsembleMember:
    seed: int
    weights: WeightSet
    final_loss: float


@dataclass(frozen=True)
class TrainedPredictor:
    """A replicated-restart ensemble plus the context needed to apply it."""

    topology: Topology
    members: tuple[EnsembleMember, ...]
    active_psfs: tuple[PsfId, ...]
    maxima: dict[PsfId, float]
    dropped_seeds: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.members:
            raise InputError("ensemble must have at least one member")
        if len(self.active_psfs) != self.topology.n_inputs:
            raise InputError("active PSF count must equal the input count")

    def predict_normalized(self, X) -> np.ndarray:
        """Ensemble-mean HEP for rows of normalized inputs."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        preds = [forward_batch(m.weights, X) for m in self.members]
        return np.mean(preds, axis=0)

    def predict_instances(self, obs) -> np.ndarray:
        """Predict HEP for raw-multiplier instances using the stored maxima."""
        X = obs.matrix(self.active_psfs)
        scale = np.array([self.maxima[p] for p in self.active_psfs])
        return self.predict_normalized(X / scale)


@dataclass(frozen=True)
class MetricReport:
    """Per-instance squared errors plus their mean and the determination
    coefficient (None when the observed values have zero variance)."""

    se: tuple[float, ...]
    mse: float
    r2: Optional[float]


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def init_weights(topology: Topology, seed: int) -> WeightSet:
    """Uniform [-0.5, 0.5] initialization, deterministic per (topology, seed).

    Draw order is fixed (hidden weights, hidden biases, output weights,
    output bias) so serialized runs replay exactly.
    """
    rng = np.random.default_rng(seed)
    return WeightSet(
        w_hidden=rng.uniform(-0.5, 0.5, size=(topology.n_hidden, topology.n_inputs)),
        b_hidden=rng.uniform(-0.5, 0.5, size=topology.n_hidden),
        w_output=rng.uniform(-0.5, 0.5, size=topology.n_hidden),
        b_output=rng.uniform(-0.5, 0.5),
    )


def forward_batch(weights: WeightSet, X) -> np.ndarray:
    """Network output for each row of X; every value strictly inside (0, 1)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != weights.w_hidden.shape[1]:
        raise InputError(
            f"input has {X.shape[1]} components, network expects "
            f"{weights.w_hidden.shape[1]}"
        )
    hidden = _sigmoid(X @ weights.w_hidden.T + weights.b_hidden)
    return _sigmoid(hidden @ weights.w_output + weights.b_output)


def forward(weights: WeightSet, x) -> float:
    """Network output for a single normalized PSF vector."""
    return float(forward_batch(weights, np.asarray(x, dtype=float).reshape(1, -1))[0])


def loss_and_gradient(weights: WeightSet, X, y):
    """Mean-squared-error loss and its exact gradient in one backward pass.

    Returns (loss, gradients) where gradients mirrors the WeightSet fields.
    Kept separate from the training loop so the analytic gradient can be
    checked against finite differences.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    hidden = _sigmoid(X @ weights.w_hidden.T + weights.b_hidden)
    out = _sigmoid(hidden @ weights.w_output + weights.b_output)
    err = out - y
    loss = float(err @ err) / n
    # d loss / d preactivation of the output unit
    d_out = (2.0 / n) * err * out * (1.0 - out)
    g_w_output = hidden.T @ d_out
    g_b_output = float(d_out.sum())
    d_hidden = np.outer(d_out, weights.w_output) * hidden * (1.0 - hidden)
    g_w_hidden = d_hidden.T @ X
    g_b_hidden = d_hidden.sum(axis=0)
    return loss, (g_w_hidden, g_b_hidden, g_w_output, g_b_output)


def train_one(X, y, topology: Topology, config: TrainingConfig, seed: int):
    """Full-batch gradient descent from one seed.

    Stops at max_epochs or when the loss improvement over PLATEAU_WINDOW
    epochs drops below config.loss_tolerance. Returns (weights, loss trace);
    the trace entry for an epoch is the loss measured before that epoch's
    update, so the returned weights correspond to the final trace entry.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[0] != y.shape[0]:
        raise InputError("training data must be a non-empty (X, y) pair")
    if X.shape[1] != topology.n_inputs:
        raise InputError(
            f"training data has {X.shape[1]} inputs, topology expects "
            f"{topology.n_inputs}"
        )
    ws = init_weights(topology, seed)
    w1 = ws.w_hidden.copy()
    b1 = ws.b_hidden.copy()
    w2 = ws.w_output.copy()
    b2 = ws.b_output
    lr = config.learning_rate
    n = X.shape[0]
    trace: list[float] = []
    # overflow here is the divergence signal, caught via the finiteness check
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(config.max_epochs):
            hidden = _sigmoid(X @ w1.T + b1)
            out = _sigmoid(hidden @ w2 + b2)
            err = out - y
            loss = float(err @ err) / n
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, seed)
            trace.append(loss)
            if epoch >= PLATEAU_WINDOW and trace[epoch - PLATEAU_WINDOW] - loss < config.loss_tolerance:
                break
            d_out = (2.0 / n) * err * out * (1.0 - out)
            d_hidden = np.outer(d_out, w2) * hidden * (1.0 - hidden)
            w1 -= lr * (d_hidden.T @ X)
            b1 -= lr * d_hidden.sum(axis=0)
            w2 -= lr * (hidden.T @ d_out)
            b2 -= lr * float(d_out.sum())
    return WeightSet(w1, b1, w2, b2), trace


def _thread_cap() -> int:
    raw = os.environ.get("HRA_FORGE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def train_replicated(
    X,
    y,
    config: TrainingConfig,
    active_psfs: Sequence[PsfId],
    maxima: dict[PsfId, float],
    topology: Optional[Topology] = None,
) -> TrainedPredictor:
    """Train n_replications runs from seeds seed, seed+1, ... and ensemble them.

    Replications are independent; they may run on a thread pool (capped by
    the HRA_FORGE_THREADS environment variable) and are merged in seed order,
    so the result does not depend on scheduling. A replication that diverges
    is dropped with its seed recorded; if every replication diverges the
    whole training fails.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if topology is None:
        topology = default_topology(X.shape[1], config.hidden_nodes)
    seeds = [config.seed + k for k in range(config.n_replications)]

    def attempt(seed):
        try:
            weights, trace = train_one(X, y, topology, config, seed)
            return seed, weights, trace[-1]
        except TrainingDivergedError:
            return seed, None, None

    cap = _thread_cap()
    if cap > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=min(cap, len(seeds))) as pool:
            outcomes = list(pool.map(attempt, seeds))
    else:
        outcomes = [attempt(s) for s in seeds]

    members = tuple(
        EnsembleMember(seed, weights, loss)
        for seed, weights, loss in outcomes
        if weights is not None
    )
    dropped = tuple(seed for seed, weights, _ in outcomes if weights is None)
    if not members:
        raise NumericalError(
            f"all {len(seeds)} training replications diverged (seeds {seeds})"
        )
    return TrainedPredictor(
        topology=topology,
        members=members,
        active_psfs=tuple(active_psfs),
        maxima=dict(maxima),
        dropped_seeds=dropped,
    )


def metrics(predicted, observed) -> MetricReport:
    """Squared error per instance, their mean, and the determination coefficient.

    R-squared is 1 - sum((pred-obs)^2) / sum((obs-mean)^2); when the observed
    values have zero variance it is undefined and reported as None.
    """
    pred = np.asarray(predicted, dtype=float)
    obs = np.asarray(observed, dtype=float)
    if pred.shape != obs.shape or pred.ndim != 1 or pred.size == 0:
        raise InputError("predicted and observed must be equal-length non-empty lists")
    se = (pred - obs) ** 2
    mse = float(se.mean())
    denom = float(((obs - obs.mean()) ** 2).sum())
    r2 = None if denom == 0.0 else 1.0 - float(se.sum()) / denom
    return MetricReport(tuple(float(v) for v in se), mse, r2)


# --- predictor and training-config files ------------------------------------

def save_predictor(pred: TrainedPredictor, path) -> None:
    """Serialize a trained predictor to its versioned plain-text format."""
    lines = [_PREDICTOR_MAGIC]
    t = pred.topology
    lines.append(f"topology {t.n_inputs} {t.n_hidden} {t.n_outputs}")
    lines.append("active " + ",".join(p.letter for p in pred.active_psfs))
    lines.append("maxima " + " ".join(fmt_full(pred.maxima[p]) for p in pred.active_psfs))
    lines.append(f"ensemble {len(pred.members)}")
    for m in pred.members:
        lines.append(f"member {m.seed} {fmt_full(m.final_loss)}")
        for row in m.weights.w_hidden:
            lines.append("wh " + " ".join(fmt_full(v) for v in row))
        lines.append("bh " + " ".join(fmt_full(v) for v in m.weights.b_hidden))
        lines.append("wo " + " ".join(fmt_full(v) for v in m.weights.w_output))
        lines.append("bo " + fmt_full(m.weights.b_output))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_predictor(path) -> TrainedPredictor:
    """Load a predictor written by :func:`save_predictor`."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = [l.rstrip("\n") for l in handle]
    except OSError as exc:
        raise InputError(f"cannot read predictor {path}: {exc}") from exc
    if not lines or lines[0] != _PREDICTOR_MAGIC:
        raise InputError(f"{path}: not a recognized predictor file")

    def fail(why):
        raise InputError(f"{path}: malformed predictor file: {why}")

    try:
        _, n_in, n_hid, n_out = lines[1].split()
        topology = Topology(int(n_in), int(n_hid), int(n_out))
        letters = lines[2].removeprefix("active ").split(",")
        active = tuple(PsfId.from_letter(l) for l in letters)
        max_vals = [float(v) for v in lines[3].removeprefix("maxima ").split()]
        maxima = dict(zip(active, max_vals))
        count = int(lines[4].removeprefix("ensemble "))
        members = []
        pos = 5
        for _ in range(count):
            _, seed, loss = lines[pos].split()
            pos += 1
            w_hidden = []
            for _ in range(topology.n_hidden):
                w_hidden.append([float(v) for v in lines[pos].split()[1:]])
                pos += 1
            b_hidden = [float(v) for v in lines[pos].split()[1:]]
            pos += 1
            w_output = [float(v) for v in lines[pos].split()[1:]]
            pos += 1
            b_output = float(lines[pos].split()[1])
            pos += 1
            members.append(
                EnsembleMember(
                    int(seed),
                    WeightSet(np.array(w_hidden), np.array(b_hidden),
                              np.array(w_output), b_output),
                    float(loss),
                )
            )
    except (IndexError, ValueError) as exc:
        fail(exc)
    return TrainedPredictor(topology, tuple(members), active, maxima)


_CONFIG_KEYS = {
    "seed": ("seed", int),
    "epochs": ("max_epochs", int),
    "learning_rate": ("learning_rate", float),
    "tolerance": ("loss_tolerance", float),
    "replications": ("n_replications", int),
    "hidden_nodes": ("hidden_nodes", int),
}


def parse_training_config(text: str) -> TrainingConfig:
    """Parse a flat key=value training configuration.

    Recognized keys: seed, epochs, learning_rate, tolerance, replications,
    hidden_nodes. Unknown keys are rejected so typos do not silently fall
    back to defaults.
    """
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"training config line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise InputError(
                f"training config line {lineno}: unknown key {key!r} "
                f"(expected one of {', '.join(sorted(_CONFIG_KEYS))})"
            )
        field_name, cast = _CONFIG_KEYS[key]
        try:
            overrides[field_name] = cast(value.strip())
        except ValueError:
            raise InputError(
                f"training config line {lineno}: cannot parse {value.strip()!r}"
            ) from None
    return TrainingConfig(**overrides)


def load_training_config(path) -> TrainingConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return parse_training_config(handle.read())
    except OSError as exc:
        raise InputError(f"cannot read training config {path}: {exc}") from exc
