"""Feedforward query re-encoder: maps (query embedding, hop-1 fact embedding)
to the query embedding used for the second hop.

Architecture: one hidden relu layer over the concatenated inputs,
    q_r = W2 @ relu(W1 @ [q; d1] + b1) + b2
trained by plain mini-batch gradient descent with hand-written
backpropagation. `gradient_check` verifies the backward pass against
central finite differences.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DimensionError, DivergenceError, FormatError
from .fileio import atomic_write_text, format_float

logger = logging.getLogger(__name__)

MODEL_MAGIC = "#hopchain-reencoder v1"

OBJECTIVES = ("mse", "inner_product")


@dataclass
class ReEncoderModel:
    dim: int
    hidden: int
    W1: np.ndarray  # [hidden, 2*dim]
    b1: np.ndarray  # [hidden]
    W2: np.ndarray  # [dim, hidden]
    b2: np.ndarray  # [dim]

    def __post_init__(self):
        expected = {
            "W1": (self.hidden, 2 * self.dim),
            "b1": (self.hidden,),
            "W2": (self.dim, self.hidden),
            "b2": (self.dim,),
        }
        for name, shape in expected.items():
            array = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if array.shape != shape:
                raise DimensionError(f"{name} has shape {array.shape}, expected {shape}")
            if not np.all(np.isfinite(array)):
                raise ConfigError(f"{name} contains non-finite values")
            setattr(self, name, array)

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        return [("W1", self.W1), ("b1", self.b1), ("W2", self.W2), ("b2", self.b2)]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    batch_size: int = 16
    seed: int = 0
    hidden: int | None = None  # None -> 4 * embedding dim
    objective: str = "mse"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.hidden is not None and self.hidden < 1:
            raise ConfigError(f"hidden must be >= 1, got {self.hidden}")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")


@dataclass
class ChainTripleBatch:
    """Training triples: original query, gold first fact, gold second fact."""

    q_qa: np.ndarray  # [B, dim]
    d1: np.ndarray  # [B, dim]
    d2: np.ndarray  # [B, dim]

    def __post_init__(self):
        self.q_qa = np.atleast_2d(np.asarray(self.q_qa, dtype=np.float64))
        self.d1 = np.atleast_2d(np.asarray(self.d1, dtype=np.float64))
        self.d2 = np.atleast_2d(np.asarray(self.d2, dtype=np.float64))
        if not (self.q_qa.shape == self.d1.shape == self.d2.shape):
            raise DimensionError(
                f"triple arrays disagree: {self.q_qa.shape}, {self.d1.shape}, {self.d2.shape}"
            )

    @classmethod
    def from_triples(cls, triples) -> "ChainTripleBatch":
        if not triples:
            raise ConfigError("triples must be non-empty")
        qs, d1s, d2s = zip(*triples)
        lengths = {len(np.asarray(v)) for v in (*qs, *d1s, *d2s)}
        if len(lengths) != 1:
            raise DimensionError(f"triples mix embedding dims: {sorted(lengths)}")
        return cls(np.vstack(qs), np.vstack(d1s), np.vstack(d2s))

    def __len__(self) -> int:
        return self.q_qa.shape[0]

    @property
    def dim(self) -> int:
        return self.q_qa.shape[1]


def init_model(dim: int, hidden: int, seed: int) -> ReEncoderModel:
    """Seeded uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialization."""
    rng = np.random.default_rng(seed)
    bound1 = 1.0 / np.sqrt(2 * dim)
    bound2 = 1.0 / np.sqrt(hidden)
    return ReEncoderModel(
        dim=dim,
        hidden=hidden,
        W1=rng.uniform(-bound1, bound1, size=(hidden, 2 * dim)),
        b1=rng.uniform(-bound1, bound1, size=hidden),
        W2=rng.uniform(-bound2, bound2, size=(dim, hidden)),
        b2=rng.uniform(-bound2, bound2, size=dim),
    )


def _forward(model: ReEncoderModel, q: np.ndarray, d1: np.ndarray):
    x = np.concatenate([q, d1], axis=1)  # [B, 2*dim]
    z = x @ model.W1.T + model.b1
    h = np.maximum(z, 0.0)
    y = h @ model.W2.T + model.b2
    return x, z, h, y


def reencode(model: ReEncoderModel, q_qa, d1) -> np.ndarray:
    """Produce the second-hop query embedding for one (query, fact) pair."""
    q = np.asarray(q_qa, dtype=np.float64)
    d = np.asarray(d1, dtype=np.float64)
    if q.shape != (model.dim,) or d.shape != (model.dim,):
        raise DimensionError(
            f"inputs have shapes {q.shape} and {d.shape}, model dim is {model.dim}"
        )
    _, _, _, y = _forward(model, q[None, :], d[None, :])
    return y[0]


def _loss_and_output_grad(y: np.ndarray, target: np.ndarray, objective: str):
    batch, dim = y.shape
    if objective == "mse":
        diff = y - target
        loss = float(np.mean(diff * diff))
        return loss, 2.0 * diff / (batch * dim)
    # negative mean inner product (negative-free alternative objective)
    loss = float(-np.mean(np.sum(y * target, axis=1)))
    return loss, -target / batch


def _backward(model: ReEncoderModel, x, z, h, grad_y):
    grad_W2 = grad_y.T @ h
    grad_b2 = grad_y.sum(axis=0)
    grad_h = grad_y @ model.W2
    grad_z = grad_h * (z > 0.0)
    grad_W1 = grad_z.T @ x
    grad_b1 = grad_z.sum(axis=0)
    return {"W1": grad_W1, "b1": grad_b1, "W2": grad_W2, "b2": grad_b2}


def batch_loss(model: ReEncoderModel, triples: ChainTripleBatch, objective: str = "mse") -> float:
    _, _, _, y = _forward(model, triples.q_qa, triples.d1)
    loss, _ = _loss_and_output_grad(y, triples.d2, objective)
    return loss


def train(triples: ChainTripleBatch, config: TrainConfig, on_epoch=None) -> ReEncoderModel:
    """Mini-batch gradient descent; deterministic given config (incl. seed).

    Per-epoch train loss (full-set loss at the end of each epoch) goes to
    the module logger and to the optional on_epoch(epoch, loss) callback.
    """
    if len(triples) == 0:
        raise ConfigError("triples must be non-empty")
    dim = triples.dim
    hidden = config.hidden if config.hidden is not None else 4 * dim
    model = init_model(dim, hidden, config.seed)
    rng = np.random.default_rng(config.seed + 1)
    count = len(triples)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(count)
        for start in range(0, count, config.batch_size):
            pick = order[start : start + config.batch_size]
            q, d1, d2 = triples.q_qa[pick], triples.d1[pick], triples.d2[pick]
            x, z, h, y = _forward(model, q, d1)
            _, grad_y = _loss_and_output_grad(y, d2, config.objective)
            grads = _backward(model, x, z, h, grad_y)
            for name, value in model.parameters():
                value -= config.learning_rate * grads[name]
        epoch_loss = batch_loss(model, triples, config.objective)
        if not np.isfinite(epoch_loss):
            raise DivergenceError(epoch, epoch_loss)
        logger.debug("epoch %d train loss %.6g", epoch, epoch_loss)
        if on_epoch is not None:
            on_epoch(epoch, epoch_loss)
    return model


def gradient_check(model: ReEncoderModel, triple, epsilon: float) -> float:
    """Max relative error between analytic MSE gradients and central
    finite differences over every parameter.

    Relative error is |analytic - numeric| / max(|analytic|, |numeric|);
    entries where both magnitudes are below 1e-12 count as zero error.
    """
    if not 0.0 < epsilon <= 1e-2:
        raise ConfigError(f"epsilon must be in (0, 1e-2], got {epsilon}")
    q, d1, d2 = (np.asarray(v, dtype=np.float64) for v in triple)
    batch = ChainTripleBatch(q[None, :], d1[None, :], d2[None, :])

    x, z, h, y = _forward(model, batch.q_qa, batch.d1)
    _, grad_y = _loss_and_output_grad(y, batch.d2, "mse")
    analytic = _backward(model, x, z, h, grad_y)

    probe = replace(
        model,
        W1=model.W1.copy(),
        b1=model.b1.copy(),
        W2=model.W2.copy(),
        b2=model.b2.copy(),
    )
    worst = 0.0
    for name, values in probe.parameters():
        flat = values.reshape(-1)
        grad_flat = analytic[name].reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + epsilon
            plus = batch_loss(probe, batch, "mse")
            flat[i] = original - epsilon
            minus = batch_loss(probe, batch, "mse")
            flat[i] = original
            numeric = (plus - minus) / (2.0 * epsilon)
            a, n = abs(grad_flat[i]), abs(numeric)
            if a < 1e-12 and n < 1e-12:
                continue
            worst = max(worst, abs(grad_flat[i] - numeric) / max(a, n))
    return worst


def save_model(path, model: ReEncoderModel, comment: str | None = None) -> None:
    """Structured-text snapshot: dims then row-major full-precision arrays."""
    lines = [MODEL_MAGIC, f"#dim={model.dim} hidden={model.hidden}"]
    if comment:
        lines.append(f"# {comment}")
    for name, values in model.parameters():
        lines.append(name)
        rows = values if values.ndim == 2 else values[None, :]
        for row in rows:
            lines.append(" ".join(format_float(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_model(path) -> ReEncoderModel:
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines or lines[0] != MODEL_MAGIC:
        raise FormatError(f"not a re-encoder model file (expected {MODEL_MAGIC!r})", line=1)
    if len(lines) < 2 or not lines[1].startswith("#dim="):
        raise FormatError("missing '#dim=<d> hidden=<h>' line", line=2)
    try:
        dim_part, hidden_part = lines[1][1:].split()
        dim = int(dim_part.split("=")[1])
        hidden = int(hidden_part.split("=")[1])
    except (ValueError, IndexError) as exc:
        raise FormatError(f"bad dimensions line {lines[1]!r}", line=2) from exc

    rows_needed = {"W1": hidden, "b1": 1, "W2": dim, "b2": 1}
    arrays: dict[str, np.ndarray] = {}
    cursor = 2
    while cursor < len(lines):
        line = lines[cursor]
        cursor += 1
        if not line.strip() or line.startswith("#"):
            continue
        name = line.strip()
        if name not in rows_needed:
            raise FormatError(f"unexpected section {name!r}", line=cursor)
        count = rows_needed[name]
        try:
            rows = [
                [float(v) for v in lines[cursor + r].split()] for r in range(count)
            ]
        except (IndexError, ValueError) as exc:
            raise FormatError(f"bad rows for section {name!r}", line=cursor + 1) from exc
        cursor += count
        arrays[name] = np.array(rows, dtype=np.float64)
    missing = sorted(set(rows_needed) - set(arrays))
    if missing:
        raise FormatError(f"missing sections: {missing}")
    return ReEncoderModel(
        dim=dim,
        hidden=hidden,
        W1=arrays["W1"],
        b1=arrays["b1"][0],
        W2=arrays["W2"],
        b2=arrays["b2"][0],
    )
