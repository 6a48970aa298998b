"""One-hidden-layer scalar-output network with exact analytic gradients.

The network: embedding lookup v_k, hidden layer z2 = W1 v_k + b1, a2 =
sigmoid(z2), output z3 = W2 a2 + b2, yhat = sigmoid(z3), squared-error loss
L = (yhat - y)^2 / 2 against a binary target. The backward pass is the closed
form, including the sparse embedding gradient (only row k of E moves). A
central finite-difference verifier doubles as the test oracle.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from . import numkit
from .activations import sigmoid


@dataclass
class MicroNetParams:
    E: np.ndarray   # V x d embeddings
    W1: np.ndarray  # h x d
    b1: np.ndarray  # h
    W2: np.ndarray  # 1 x h
    b2: float

    @property
    def V(self) -> int:
        return self.E.shape[0]

    @property
    def d(self) -> int:
        return self.E.shape[1]

    @property
    def h(self) -> int:
        return self.W1.shape[0]

    def validate(self) -> None:
        if self.W1.shape != (self.h, self.d):
            raise ValueError("W1 shape inconsistent with E")
        if self.b1.shape != (self.h,):
            raise ValueError("b1 shape inconsistent with W1")
        if self.W2.shape != (1, self.h):
            raise ValueError("W2 must be 1 x h")

    def copy(self) -> "MicroNetParams":
        return MicroNetParams(
            self.E.copy(), self.W1.copy(), self.b1.copy(),
            self.W2.copy(), float(self.b2),
        )


@dataclass
class ForwardTrace:
    k: int
    v_k: np.ndarray
    z2: np.ndarray
    a2: np.ndarray
    z3: float
    yhat: float


@dataclass
class Gradients:
    dE: np.ndarray
    dW1: np.ndarray
    db1: np.ndarray
    dW2: np.ndarray
    db2: float


def init_params(rng: np.random.Generator, v: int, d: int, h: int) -> MicroNetParams:
    """Uniform(-0.5, 0.5) everywhere; keeps both sigmoids unsaturated."""
    if v < 1 or d < 1 or h < 1:
        raise ValueError("V, d, h must all be >= 1")
    return MicroNetParams(
        E=rng.uniform(-0.5, 0.5, size=(v, d)),
        W1=rng.uniform(-0.5, 0.5, size=(h, d)),
        b1=rng.uniform(-0.5, 0.5, size=h),
        W2=rng.uniform(-0.5, 0.5, size=(1, h)),
        b2=float(rng.uniform(-0.5, 0.5)),
    )


def forward(params: MicroNetParams, k: int) -> ForwardTrace:
    params.validate()
    if not (0 <= k < params.V):
        raise ValueError(f"token index {k} outside vocabulary of {params.V}")
    v_k = params.E[k].copy()
    z2 = numkit.matvec(params.W1, v_k) + params.b1
    a2 = sigmoid(z2)
    z3 = float(numkit.matvec(params.W2, a2)[0] + params.b2)
    yhat = sigmoid(z3)
    return ForwardTrace(k=k, v_k=v_k, z2=z2, a2=a2, z3=z3, yhat=yhat)


def loss(yhat: float, y: int) -> float:
    """Squared error halved: (yhat - y)^2 / 2 for a binary target."""
    if y not in (0, 1):
        raise ValueError("target y must be 0 or 1")
    diff = yhat - y
    return 0.5 * diff * diff


def backward(params: MicroNetParams, trace: ForwardTrace, y: int) -> Gradients:
    """Closed-form gradients; dE is nonzero only in row trace.k."""
    params.validate()
    if y not in (0, 1):
        raise ValueError("target y must be 0 or 1")
    if trace.z2.shape != (params.h,) or trace.v_k.shape != (params.d,):
        raise ValueError("trace shapes do not match params")
    # delta3 = dL/dz3; sigma'(z3) written via yhat since a = sigma(z) there
    delta3 = (trace.yhat - y) * trace.yhat * (1.0 - trace.yhat)
    sp2 = trace.a2 * (1.0 - trace.a2)
    delta2 = params.W2[0] * delta3 * sp2
    dW2 = (delta3 * trace.a2).reshape(1, -1)
    db2 = delta3
    dW1 = np.outer(delta2, trace.v_k)
    db1 = delta2.copy()
    dE = np.zeros_like(params.E)
    dE[trace.k] = numkit.matvec(params.W1.T, delta2)
    return Gradients(dE=dE, dW1=dW1, db1=db1, dW2=dW2, db2=float(db2))


def finite_difference_grads(
    params: MicroNetParams, k: int, y: int, eps: float = 1e-5
) -> Gradients:
    """Central differences (L(t + eps) - L(t - eps)) / (2 eps) per parameter."""
    if eps <= 0.0:
        raise ValueError("eps must be > 0")
    work = params.copy()

    def loss_now() -> float:
        return loss(forward(work, k).yhat, y)

    def sweep(arr: np.ndarray) -> np.ndarray:
        grad = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.shape[0]):
            keep = flat[i]
            flat[i] = keep + eps
            up = loss_now()
            flat[i] = keep - eps
            down = loss_now()
            flat[i] = keep
            gflat[i] = (up - down) / (2.0 * eps)
        return grad

    dE = sweep(work.E)
    dW1 = sweep(work.W1)
    db1 = sweep(work.b1)
    dW2 = sweep(work.W2)
    keep = work.b2
    work.b2 = keep + eps
    up = loss_now()
    work.b2 = keep - eps
    down = loss_now()
    work.b2 = keep
    db2 = (up - down) / (2.0 * eps)
    return Gradients(dE=dE, dW1=dW1, db1=db1, dW2=dW2, db2=float(db2))


def sgd_step(params: MicroNetParams, grads: Gradients, lr: float) -> MicroNetParams:
    """theta <- theta - lr * grad, elementwise, into fresh arrays."""
    if lr <= 0.0:
        raise ValueError("lr must be > 0")
    return MicroNetParams(
        E=params.E - lr * grads.dE,
        W1=params.W1 - lr * grads.dW1,
        b1=params.b1 - lr * grads.db1,
        W2=params.W2 - lr * grads.dW2,
        b2=float(params.b2 - lr * grads.db2),
    )


def gradient_check(
    params: MicroNetParams, k: int, y: int, eps: float = 1e-5
) -> float:
    """Max over parameters of |analytic - numeric| / (|analytic| + 1e-8)."""
    trace = forward(params, k)
    an = backward(params, trace, y)
    num = finite_difference_grads(params, k, y, eps)
    worst = 0.0
    for a, b in (
        (an.dE, num.dE), (an.dW1, num.dW1), (an.db1, num.db1),
        (an.dW2, num.dW2),
        (np.array([an.db2]), np.array([num.db2])),
    ):
        rel = np.abs(a - b) / (np.abs(a) + 1e-8)
        worst = max(worst, float(np.max(rel)))
    return worst


# ---------------------------------------------------------------------------
# persistence: matrices via numkit CSV + a JSON manifest

_FILES = {"E": "E.csv", "W1": "W1.csv", "b1": "b1.csv", "W2": "W2.csv", "b2": "b2.csv"}


def save_params(dirpath: str, params: MicroNetParams, seed=None) -> None:
    os.makedirs(dirpath, exist_ok=True)
    params.validate()
    numkit.save_matrix_csv(os.path.join(dirpath, _FILES["E"]), params.E)
    numkit.save_matrix_csv(os.path.join(dirpath, _FILES["W1"]), params.W1)
    numkit.save_matrix_csv(os.path.join(dirpath, _FILES["b1"]), params.b1.reshape(1, -1))
    numkit.save_matrix_csv(os.path.join(dirpath, _FILES["W2"]), params.W2)
    numkit.save_matrix_csv(os.path.join(dirpath, _FILES["b2"]), np.array([[params.b2]]))
    manifest = {
        "V": params.V, "d": params.d, "h": params.h,
        "seed": seed, "files": _FILES,
    }
    with open(os.path.join(dirpath, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_params(dirpath: str) -> MicroNetParams:
    with open(os.path.join(dirpath, "manifest.json")) as fh:
        manifest = json.load(fh)
    files = manifest["files"]
    params = MicroNetParams(
        E=numkit.load_matrix_csv(os.path.join(dirpath, files["E"])),
        W1=numkit.load_matrix_csv(os.path.join(dirpath, files["W1"])),
        b1=numkit.load_matrix_csv(os.path.join(dirpath, files["b1"]))[0],
        W2=numkit.load_matrix_csv(os.path.join(dirpath, files["W2"])),
        b2=float(numkit.load_matrix_csv(os.path.join(dirpath, files["b2"]))[0, 0]),
    )
    params.validate()
    if (params.V, params.d, params.h) != (manifest["V"], manifest["d"], manifest["h"]):
        raise ValueError("manifest dims disagree with stored matrices")
    return params
