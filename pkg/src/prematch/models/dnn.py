"""Pyramid feed-forward network trained with Adam on binary cross-entropy.

Topology: five groups of [dropout -> batch norm -> dense+ELU] with widths
160/128/64/32/16, then a sigmoid output unit. Dropout and batch statistics
are active only in training mode; inference uses running averages, which
makes the inference-mode loss a smooth function of the parameters and lets
the backward pass be verified against finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit


@dataclass
class TrainingCurve:
    """Per-epoch training/validation loss and accuracy."""

    train_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.train_loss)

    def rows(self):
        for e in range(len(self)):
            yield e + 1, self.train_loss[e], self.train_acc[e], self.val_loss[e], self.val_acc[e]

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("epoch,train_loss,train_acc,val_loss,val_acc\n")
            for epoch, tl, ta, vl, va in self.rows():
                fh.write(f"{epoch},{tl!r},{ta!r},{vl!r},{va!r}\n")


def elu(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0, z, np.expm1(z))


def _bn_width(spec, n_in: int, g: int) -> int:
    # default order normalizes each dense layer's input; the conventional
    # order normalizes its output
    dims = [n_in] + list(spec.hidden)
    return dims[g] if spec.group_order == "dropout_bn_dense" else dims[g + 1]


def init_params(spec, n_in: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """He-normal dense weights, unit batch-norm scale, zero shifts."""
    params: dict[str, np.ndarray] = {}
    dims = [n_in] + list(spec.hidden)
    for g in range(len(spec.hidden)):
        d_in, d_out = dims[g], dims[g + 1]
        width = _bn_width(spec, n_in, g)
        params[f"bn{g}_gamma"] = np.ones(width)
        params[f"bn{g}_beta"] = np.zeros(width)
        params[f"W{g}"] = rng.normal(0.0, math.sqrt(2.0 / d_in), (d_in, d_out))
        params[f"b{g}"] = np.zeros(d_out)
    params["W_out"] = rng.normal(0.0, math.sqrt(2.0 / dims[-1]), (dims[-1], 1))
    params["b_out"] = np.zeros(1)
    return params


def init_state(spec, n_in: int) -> dict[str, np.ndarray]:
    state: dict[str, np.ndarray] = {}
    for g in range(len(spec.hidden)):
        width = _bn_width(spec, n_in, g)
        state[f"bn{g}_mean"] = np.zeros(width)
        state[f"bn{g}_var"] = np.ones(width)
    return state


def _batchnorm(params, state, spec, g: int, x: np.ndarray, training: bool):
    if training:
        mu = x.mean(axis=0)
        var = x.var(axis=0)
        state[f"bn{g}_mean"] = (1.0 - spec.bn_momentum) * state[f"bn{g}_mean"] + spec.bn_momentum * mu
        state[f"bn{g}_var"] = (1.0 - spec.bn_momentum) * state[f"bn{g}_var"] + spec.bn_momentum * var
    else:
        mu = state[f"bn{g}_mean"]
        var = state[f"bn{g}_var"]
    inv_std = 1.0 / np.sqrt(var + spec.bn_eps)
    xhat = (x - mu) * inv_std
    out = params[f"bn{g}_gamma"] * xhat + params[f"bn{g}_beta"]
    return out, {"x": x, "mu": mu, "inv_std": inv_std, "xhat": xhat}


def forward(params, state, X, spec, training: bool, rng: np.random.Generator | None):
    """Run the network; returns (probabilities, cache for backward).

    In training mode dropout masks are drawn from ``rng``, batch statistics
    normalize, and running statistics are updated in place. Group order
    "dropout_bn_dense" applies dropout and normalization to each dense
    layer's input; "dense_bn_dropout" is the conventional
    dense -> norm -> activation -> dropout stack.
    """
    h = np.asarray(X, dtype=float)
    groups = []
    keep = 1.0 - spec.dropout_rate
    pre_dense = spec.group_order == "dropout_bn_dense"
    use_dropout = training and spec.dropout_rate > 0.0
    for g in range(len(spec.hidden)):
        if pre_dense:
            mask = (rng.random(h.shape) >= spec.dropout_rate) / keep if use_dropout else None
            dropped = h * mask if mask is not None else h
            u, bn_cache = _batchnorm(params, state, spec, g, dropped, training)
            z = u @ params[f"W{g}"] + params[f"b{g}"]
            a = elu(z)
            h = a
            cache = {"mask": mask, "bn": bn_cache, "dense_in": u, "act_in": z, "a": a}
        else:
            dense_in = h
            z = dense_in @ params[f"W{g}"] + params[f"b{g}"]
            u, bn_cache = _batchnorm(params, state, spec, g, z, training)
            a = elu(u)
            mask = (rng.random(a.shape) >= spec.dropout_rate) / keep if use_dropout else None
            h = a * mask if mask is not None else a
            cache = {"mask": mask, "bn": bn_cache, "dense_in": dense_in, "act_in": u, "a": a}
        groups.append(cache)
    z_out = h @ params["W_out"] + params["b_out"]
    p = expit(z_out[:, 0])
    cache = {"groups": groups, "z_out": z_out, "p": p, "last_h": h, "training": training}
    return p, cache


def bce_loss(z_out: np.ndarray, y: np.ndarray) -> float:
    """Binary cross-entropy straight from logits (stable for large |z|)."""
    z = z_out[:, 0]
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def _batchnorm_backward(params, g: int, bn_cache: dict, dout: np.ndarray, training: bool, grads: dict):
    grads[f"bn{g}_gamma"] = (dout * bn_cache["xhat"]).sum(axis=0)
    grads[f"bn{g}_beta"] = dout.sum(axis=0)
    dxhat = dout * params[f"bn{g}_gamma"]
    inv_std = bn_cache["inv_std"]
    if not training:
        return dxhat * inv_std  # running statistics are constants
    m = dout.shape[0]
    xc = bn_cache["x"] - bn_cache["mu"]
    dvar = (dxhat * xc).sum(axis=0) * (-0.5) * inv_std**3
    dmu = -(dxhat.sum(axis=0)) * inv_std + dvar * (-2.0) * xc.mean(axis=0)
    return dxhat * inv_std + dvar * 2.0 * xc / m + dmu / m


def loss_and_grads(params, state, X, y, spec, training: bool, rng=None):
    """Forward plus analytic backward. Returns (loss, grads, probabilities)."""
    y = np.asarray(y, dtype=float)
    p, cache = forward(params, state, X, spec, training, rng)
    n = X.shape[0]
    loss = bce_loss(cache["z_out"], y)
    grads = {}
    dz_out = ((p - y) / n)[:, None]
    grads["W_out"] = cache["last_h"].T @ dz_out
    grads["b_out"] = dz_out.sum(axis=0)
    dh = dz_out @ params["W_out"].T
    pre_dense = spec.group_order == "dropout_bn_dense"
    for g in reversed(range(len(spec.hidden))):
        gc = cache["groups"][g]
        elu_grad = np.where(gc["act_in"] > 0, 1.0, gc["a"] + 1.0)
        if pre_dense:
            dz = dh * elu_grad
            grads[f"W{g}"] = gc["dense_in"].T @ dz
            grads[f"b{g}"] = dz.sum(axis=0)
            du = dz @ params[f"W{g}"].T
            dx = _batchnorm_backward(params, g, gc["bn"], du, training, grads)
            dh = dx * gc["mask"] if gc["mask"] is not None else dx
        else:
            da = dh * gc["mask"] if gc["mask"] is not None else dh
            du = da * elu_grad
            dz = _batchnorm_backward(params, g, gc["bn"], du, training, grads)
            grads[f"W{g}"] = gc["dense_in"].T @ dz
            grads[f"b{g}"] = dz.sum(axis=0)
            dh = dz @ params[f"W{g}"].T
    return loss, grads, p


class AdamState:
    def __init__(self, params: dict[str, np.ndarray]):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads, spec) -> None:
        self.t += 1
        b1, b2 = spec.beta1, spec.beta2
        correction1 = 1.0 - b1**self.t
        correction2 = 1.0 - b2**self.t
        for k, g in grads.items():
            self.m[k] = b1 * self.m[k] + (1.0 - b1) * g
            self.v[k] = b2 * self.v[k] + (1.0 - b2) * g * g
            mhat = self.m[k] / correction1
            vhat = self.v[k] / correction2
            params[k] = params[k] - spec.learning_rate * mhat / (np.sqrt(vhat) + spec.adam_eps)


class DnnModel:
    def __init__(self, spec, params, state, curve, epochs_run, stopped_early, seed):
        self.spec = spec
        self.params = params
        self.state = state
        self.curve_ = curve
        self.epochs_run_ = epochs_run
        self.stopped_early_ = stopped_early
        self.seed = seed
        self.n_features_in_ = params["W0"].shape[0]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        from prematch.models.base import check_predict_input

        X, squeeze = check_predict_input(X, self.n_features_in_)
        p, _ = forward(self.params, self.state, X, self.spec, training=False, rng=None)
        return float(p[0]) if squeeze else p

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)
        return (np.asarray(proba) >= 0.5).astype(int)

    def parameter_count(self) -> int:
        return sum(v.size for v in self.params.values())


def fit_dnn(spec, X: np.ndarray, y: np.ndarray, seed: int) -> DnnModel:
    """Mini-batch Adam with early stopping on a held-out validation slice.

    Weight init, the validation split, batch shuffling, and dropout masks all
    derive from ``seed``. The per-epoch curve records training-mode loss and
    accuracy averaged over the epoch's batches and inference-mode validation
    metrics at the epoch's end.
    """
    if spec.group_order not in ("dropout_bn_dense", "dense_bn_dropout"):
        raise ValueError(f"unknown group order {spec.group_order!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    rng = np.random.default_rng(seed)
    params = init_params(spec, X.shape[1], rng)
    state = init_state(spec, X.shape[1])

    perm = rng.permutation(n)
    n_val = max(1, int(round(spec.val_fraction * n)))
    if n_val >= n:
        n_val = n - 1
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    X_train, y_train = X[train_idx], y[train_idx]
    X_val, y_val = X[val_idx], y[val_idx]

    adam = AdamState(params)
    curve = TrainingCurve()
    best_val = math.inf
    best_snapshot = None
    since_best = 0
    stopped_early = False
    epochs_run = 0

    for _ in range(spec.max_epochs):
        order = rng.permutation(X_train.shape[0])
        loss_sum = 0.0
        correct = 0.0
        for start in range(0, order.size, spec.batch_size):
            batch = order[start : start + spec.batch_size]
            loss, grads, p = loss_and_grads(
                params, state, X_train[batch], y_train[batch], spec, training=True, rng=rng
            )
            adam.step(params, grads, spec)
            loss_sum += loss * batch.size
            correct += float(((p >= 0.5) == (y_train[batch] >= 0.5)).sum())
        epochs_run += 1
        p_val, cache_val = forward(params, state, X_val, spec, training=False, rng=None)
        val_loss = bce_loss(cache_val["z_out"], y_val)
        curve.train_loss.append(loss_sum / order.size)
        curve.train_acc.append(correct / order.size)
        curve.val_loss.append(val_loss)
        curve.val_acc.append(float(((p_val >= 0.5) == (y_val >= 0.5)).mean()))

        if val_loss < best_val - 1e-12:
            best_val = val_loss
            best_snapshot = (
                {k: v.copy() for k, v in params.items()},
                {k: v.copy() for k, v in state.items()},
            )
            since_best = 0
        else:
            since_best += 1
            if since_best >= spec.patience:
                stopped_early = True
                break

    if spec.restore_best and best_snapshot is not None:
        params, state = best_snapshot

    return DnnModel(spec, params, state, curve, epochs_run, stopped_early, seed)
