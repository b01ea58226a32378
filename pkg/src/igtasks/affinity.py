"""Task-IG affinity: weighted instance construction, a two-branch tanh
projection network trained with margin ranking loss, and scoring.

The network and its gradients are written out explicitly (numpy only) so the
analytic gradients can be checked against finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gateway import EMBED_DIM, Gateway
from .model import OTHERS, LabeledTask
from .registry import IGRegistry

HIDDEN_DIM = 100

PARAMS_FORMAT_VERSION = 1


class InvalidTargetError(ValueError):
    """The target IG matches neither label level of the task."""


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainingInstance:
    task_embedding: np.ndarray
    pos_ig: str
    neg_ig_1: str
    neg_ig_2: str
    weight: float
    source_key: str = ""

    def __post_init__(self):
        igs = {self.pos_ig, self.neg_ig_1, self.neg_ig_2}
        if len(igs) != 3:
            raise ValueError("positive and negative IGs must be pairwise distinct")
        if self.weight <= 0:
            raise ValueError("instance weight must be positive")


@dataclass
class AffinityParams:
    W_t: np.ndarray
    b_t: np.ndarray
    W_g: np.ndarray
    b_g: np.ndarray

    @property
    def hidden_dim(self) -> int:
        return self.W_t.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W_t.shape[1]

    def copy(self) -> "AffinityParams":
        return AffinityParams(self.W_t.copy(), self.b_t.copy(),
                              self.W_g.copy(), self.b_g.copy())

    def flat(self) -> list[tuple[str, np.ndarray]]:
        return [("W_t", self.W_t), ("b_t", self.b_t),
                ("W_g", self.W_g), ("b_g", self.b_g)]


@dataclass(frozen=True)
class TrainingConfig:
    margin: float = 0.5
    batch_size: int = 64
    learning_rate: float = 0.0001
    epochs: int = 5
    dropout_p: float = 0.25
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError("dropout_p must be in [0, 1)")

    def fingerprint(self) -> str:
        import hashlib

        blob = json.dumps(self.__dict__, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def init_params(rng: np.random.Generator, input_dim: int = EMBED_DIM,
                hidden_dim: int = HIDDEN_DIM) -> AffinityParams:
    bound = 1.0 / np.sqrt(input_dim)
    return AffinityParams(
        W_t=rng.uniform(-bound, bound, size=(hidden_dim, input_dim)),
        b_t=rng.uniform(-bound, bound, size=hidden_dim),
        W_g=rng.uniform(-bound, bound, size=(hidden_dim, input_dim)),
        b_g=rng.uniform(-bound, bound, size=hidden_dim),
    )


# -- instance construction ---------------------------------------------------


def instance_weight(task: LabeledTask, target_ig: str,
                    per_ig_counts: dict[str, int], total: int,
                    n_igs: int = 24) -> float:
    """w_b * w_c * w_a for one (task, target IG) pair.

    w_b balances IG frequency, w_c reflects label agreement between task and
    sentence level, w_a downweights tasks without an organization agent.
    """
    n_g = per_ig_counts.get(target_ig, 0)
    if n_g < 1:
        raise ValueError(f"no instances counted for IG {target_ig!r}")
    w_b = total / (n_igs * n_g)
    if task.task_level == target_ig and task.sentence_level == target_ig:
        w_c = 1.0
    elif task.task_level == target_ig:
        w_c = 0.75
    elif task.sentence_level == target_ig and task.task_level == OTHERS:
        w_c = 0.25
    else:
        raise InvalidTargetError(
            f"IG {target_ig!r} matches neither label of task {task.record.key}")
    w_a = 1.0 if task.record.agent_is_org else 0.5
    return w_b * w_c * w_a


def emission_targets(task: LabeledTask) -> list[str]:
    """Which IGs a labeled task produces instances for.

    A non-Others task-level label wins; a sentence-level label only steps in
    when the task level is Others.  Conflicting non-Others levels emit only
    the task-level instance (the confidence table defines no weight for the
    sentence-level one).
    """
    if task.task_level != OTHERS:
        return [task.task_level]
    if task.sentence_level != OTHERS:
        return [task.sentence_level]
    return []


def build_instances(labeled: Sequence[LabeledTask], registry: IGRegistry,
                    gateway: Gateway, seed: int = 0) -> list[TrainingInstance]:
    """Create weighted training instances with seeded negative sampling."""
    emissions: list[tuple[LabeledTask, str]] = []
    per_ig_counts: dict[str, int] = {}
    for task in labeled:
        for target in emission_targets(task):
            emissions.append((task, target))
            per_ig_counts[target] = per_ig_counts.get(target, 0) + 1
    total = len(emissions)
    if total == 0:
        return []
    texts = [task.canonical for task, _ in emissions]
    embeddings = gateway.embed(texts)
    rng = np.random.default_rng(seed)
    names = registry.names
    instances: list[TrainingInstance] = []
    for (task, target), emb in zip(emissions, embeddings):
        pool = [n for n in names if n != target and n not in task.excluded_igs]
        if len(pool) < 2:
            continue  # cannot happen with 24 IGs and at most 3 exclusions
        negs = rng.choice(len(pool), size=2, replace=False)
        weight = instance_weight(task, target, per_ig_counts, total,
                                 n_igs=len(registry))
        instances.append(TrainingInstance(
            task_embedding=emb,
            pos_ig=target,
            neg_ig_1=pool[negs[0]],
            neg_ig_2=pool[negs[1]],
            weight=weight,
            source_key=task.record.key,
        ))
    return instances


# -- network forward / backward ---------------------------------------------


def _cosine(u: np.ndarray, v: np.ndarray) -> tuple[float, bool]:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0, True
    return float(u @ v) / (nu * nv), False


def _cosine_grads(u, v, cos):
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    du = v / (nu * nv) - cos * u / (nu * nu)
    dv = u / (nu * nv) - cos * v / (nv * nv)
    return du, dv


@dataclass
class _BranchState:
    h_raw: np.ndarray  # tanh output before dropout
    h: np.ndarray      # after dropout scaling
    x: np.ndarray
    mask: np.ndarray | None


def _branch(W, b, x, mask, dropout_p) -> _BranchState:
    h_raw = np.tanh(W @ x + b)
    if mask is not None:
        h = h_raw * mask / (1.0 - dropout_p)
    else:
        h = h_raw
    return _BranchState(h_raw=h_raw, h=h, x=x, mask=mask)


def forward(params: AffinityParams, task_embedding: np.ndarray,
            ig_embedding: np.ndarray,
            task_mask: np.ndarray | None = None,
            ig_mask: np.ndarray | None = None,
            dropout_p: float = 0.0) -> tuple[np.ndarray, np.ndarray, float, bool]:
    """Project both embeddings and return (x'_t, x'_g, cosine, degenerate).

    Masks enable inverted-scaling dropout (training); without masks the
    branches run in inference mode.
    """
    t = _branch(params.W_t, params.b_t, task_embedding, task_mask, dropout_p)
    g = _branch(params.W_g, params.b_g, ig_embedding, ig_mask, dropout_p)
    cos, degenerate = _cosine(t.h, g.h)
    return t.h, g.h, cos, degenerate


def _draw_masks(rng: np.random.Generator, hidden_dim: int, count: int,
                dropout_p: float) -> list[np.ndarray]:
    return [(rng.random(hidden_dim) >= dropout_p).astype(float) for _ in range(count)]


def batch_loss(params: AffinityParams, batch: Sequence[TrainingInstance],
               ig_embeddings: dict[str, np.ndarray], config: TrainingConfig,
               masks: Sequence[dict[str, np.ndarray]] | None = None,
               rng: np.random.Generator | None = None,
               ) -> tuple[float, dict[str, np.ndarray]]:
    """Mean weighted margin-ranking loss over a batch, with analytic gradients.

    Per instance: w_i * (max(0, sn1 - sp + margin) + max(0, sn2 - sp + margin)).
    The IG branch weights accumulate gradients from the positive and both
    negative IGs.
    """
    if not batch:
        raise ValueError("empty batch")
    if masks is None and rng is not None and config.dropout_p > 0.0:
        masks = [dict(zip(("t", "g", "n1", "n2"),
                          _draw_masks(rng, params.hidden_dim, 4, config.dropout_p)))
                 for _ in batch]
    grads = {"W_t": np.zeros_like(params.W_t), "b_t": np.zeros_like(params.b_t),
             "W_g": np.zeros_like(params.W_g), "b_g": np.zeros_like(params.b_g)}
    total = 0.0
    p = config.dropout_p
    for k, inst in enumerate(batch):
        m = masks[k] if masks is not None else {}
        t = _branch(params.W_t, params.b_t, inst.task_embedding, m.get("t"), p)
        branches = {}
        for tag, ig in (("g", inst.pos_ig), ("n1", inst.neg_ig_1), ("n2", inst.neg_ig_2)):
            branches[tag] = _branch(params.W_g, params.b_g, ig_embeddings[ig],
                                    m.get(tag), p)
        sims = {}
        degen = {}
        for tag, st in branches.items():
            sims[tag], degen[tag] = _cosine(t.h, st.h)
        margin = config.margin
        a1 = 1.0 if (sims["n1"] - sims["g"] + margin) > 0 else 0.0
        a2 = 1.0 if (sims["n2"] - sims["g"] + margin) > 0 else 0.0
        loss_i = inst.weight * (max(0.0, sims["n1"] - sims["g"] + margin)
                                + max(0.0, sims["n2"] - sims["g"] + margin))
        total += loss_i
        dsim = {"g": -inst.weight * (a1 + a2),
                "n1": inst.weight * a1,
                "n2": inst.weight * a2}
        grad_u = np.zeros_like(t.h)
        for tag, st in branches.items():
            if dsim[tag] == 0.0 or degen[tag]:
                continue
            du, dv = _cosine_grads(t.h, st.h, sims[tag])
            grad_u += dsim[tag] * du
            grad_h = dsim[tag] * dv
            if st.mask is not None:
                grad_h = grad_h * st.mask / (1.0 - p)
            grad_pre = grad_h * (1.0 - st.h_raw ** 2)
            grads["W_g"] += np.outer(grad_pre, st.x)
            grads["b_g"] += grad_pre
        if t.mask is not None:
            grad_u = grad_u * t.mask / (1.0 - p)
        grad_pre_t = grad_u * (1.0 - t.h_raw ** 2)
        grads["W_t"] += np.outer(grad_pre_t, inst.task_embedding)
        grads["b_t"] += grad_pre_t
    n = len(batch)
    for key in grads:
        grads[key] /= n
    return total / n, grads


# -- training ----------------------------------------------------------------


@dataclass
class TrainResult:
    params: AffinityParams
    epoch_losses: list[float] = field(default_factory=list)


def registry_ig_embeddings(registry: IGRegistry, gateway: Gateway) -> dict[str, np.ndarray]:
    hyps = [p.hypothesis for p in registry]
    vecs = gateway.embed(hyps)
    return {p.name: v for p, v in zip(registry, vecs)}


def train(instances: Sequence[TrainingInstance], registry: IGRegistry,
          gateway: Gateway, config: TrainingConfig,
          ig_embeddings: dict[str, np.ndarray] | None = None) -> TrainResult:
    """Adam training loop; fully determined by (seed, config, instances)."""
    if not instances:
        raise ValueError("no training instances")
    if ig_embeddings is None:
        ig_embeddings = registry_ig_embeddings(registry, gateway)
    rng = np.random.default_rng(config.seed)
    input_dim = instances[0].task_embedding.shape[0]
    params = init_params(rng, input_dim=input_dim)
    m_state = {k: np.zeros_like(v) for k, v in params.flat()}
    v_state = {k: np.zeros_like(v) for k, v in params.flat()}
    step = 0
    result = TrainResult(params=params)
    order = np.arange(len(instances))
    for _ in range(config.epochs):
        rng.shuffle(order)
        epoch_total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [instances[i] for i in order[start:start + config.batch_size]]
            loss, grads = batch_loss(params, batch, ig_embeddings, config, rng=rng)
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at step {step}: {loss}")
            epoch_total += loss * len(batch)
            step += 1
            for key, value in params.flat():
                g = grads[key]
                m_state[key] = config.adam_beta1 * m_state[key] + (1 - config.adam_beta1) * g
                v_state[key] = config.adam_beta2 * v_state[key] + (1 - config.adam_beta2) * g * g
                m_hat = m_state[key] / (1 - config.adam_beta1 ** step)
                v_hat = v_state[key] / (1 - config.adam_beta2 ** step)
                value -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
        result.epoch_losses.append(epoch_total / len(instances))
    return result


def score_affinity(params: AffinityParams, canonical_task: str, ig: str,
                   registry: IGRegistry, gateway: Gateway) -> float:
    """Inference-mode affinity in [-1, 1]; 0 for degenerate projections."""
    x_t = gateway.embed([canonical_task])[0]
    x_g = gateway.embed([registry.profile(ig).hypothesis])[0]
    _, _, cos, _ = forward(params, x_t, x_g)
    return cos


def export_representations(params: AffinityParams, tasks: Sequence[str],
                           gateway: Gateway) -> tuple[list[str], list[list]]:
    """Table of (task, learned vector, source vector) for external projection."""
    header = (["task"]
              + [f"h{i}" for i in range(params.hidden_dim)]
              + [f"x{i}" for i in range(params.input_dim)])
    rows: list[list] = []
    if tasks:
        vecs = gateway.embed(list(tasks))
        for task, x in zip(tasks, vecs):
            h = np.tanh(params.W_t @ x + params.b_t)
            rows.append([task] + [float(v) for v in h] + [float(v) for v in x])
    return header, rows


# -- parameter persistence ---------------------------------------------------


def save_params(params: AffinityParams, config: TrainingConfig, path) -> None:
    blob = {
        "version": PARAMS_FORMAT_VERSION,
        "config_fingerprint": config.fingerprint(),
        "seed": config.seed,
        "W_t": params.W_t.tolist(),
        "b_t": params.b_t.tolist(),
        "W_g": params.W_g.tolist(),
        "b_g": params.b_g.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(blob, fh)


def load_params(path) -> AffinityParams:
    with open(path, encoding="utf-8") as fh:
        blob = json.load(fh)
    if blob.get("version") != PARAMS_FORMAT_VERSION:
        raise ValueError(f"unsupported parameter file version {blob.get('version')}")
    return AffinityParams(
        W_t=np.asarray(blob["W_t"]), b_t=np.asarray(blob["b_t"]),
        W_g=np.asarray(blob["W_g"]), b_g=np.asarray(blob["b_g"]),
    )
