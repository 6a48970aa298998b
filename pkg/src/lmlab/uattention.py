"""Unitary pipelines with a single terminal measurement.

The forward contract: encode a token as a unit state, evolve it through
unitaries only (plane rotations, basis permutations, and compositions of
those), then measure once in an output context. Between encoding and that
final measurement nothing nonlinear and nothing irreversible is allowed; the
Pipeline type enforces this structurally by accepting only UnitaryOp stages.

Plane-rotation convention (shared with contexts.rotated_basis): rotating in
the (i, j) plane by theta with relative phase phi sends
    x_i -> cos(theta) x_i + sin(theta) e^{+i phi} x_j
    x_j -> -sin(theta) e^{-i phi} x_i + cos(theta) x_j
so theta = pi/4, phi = 0 on axes (0, 1) maps e1 to (1, -1, 0)/sqrt(2).
"""

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

from . import numkit
from .activations import amplitudes_from_logits
from .contexts import ContextBasis

UNITARY_TOL = 1e-12
STATE_TOL = 1e-10


def as_state(vec) -> np.ndarray:
    """Validate and return a unit complex state vector."""
    v = np.ascontiguousarray(vec, dtype=np.complex128)
    if v.ndim != 1 or v.shape[0] < 1:
        raise ValueError("state must be a nonempty 1-D vector")
    nrm = numkit.norm(v)
    if abs(nrm - 1.0) > STATE_TOL:
        raise ValueError(f"state norm {nrm!r} is not 1 within {STATE_TOL}")
    return v


class UnitaryOp:
    """Base class: a dimension, a dense form, an inverse, and application."""

    dim: int

    def dense(self) -> np.ndarray:
        raise NotImplementedError

    def inverse(self) -> "UnitaryOp":
        raise NotImplementedError

    def apply_to(self, psi: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass
class PlaneRotation(UnitaryOp):
    dim: int
    i: int
    j: int
    theta: float
    phase: float = 0.0

    def __post_init__(self):
        if not (0 <= self.i < self.dim and 0 <= self.j < self.dim):
            raise ValueError("rotation axes out of range")
        if self.i == self.j:
            raise ValueError("rotation needs two distinct axes")

    def dense(self) -> np.ndarray:
        u = np.eye(self.dim, dtype=np.complex128)
        c = math.cos(self.theta)
        s = math.sin(self.theta)
        u[self.i, self.i] = c
        u[self.i, self.j] = s * cmath.exp(1j * self.phase)
        u[self.j, self.i] = -s * cmath.exp(-1j * self.phase)
        u[self.j, self.j] = c
        return u

    def inverse(self) -> "PlaneRotation":
        return PlaneRotation(self.dim, self.i, self.j, -self.theta, self.phase)

    def apply_to(self, psi: np.ndarray) -> np.ndarray:
        out = psi.copy()
        c = math.cos(self.theta)
        s = math.sin(self.theta)
        xi = psi[self.i]
        xj = psi[self.j]
        out[self.i] = c * xi + s * cmath.exp(1j * self.phase) * xj
        out[self.j] = -s * cmath.exp(-1j * self.phase) * xi + c * xj
        return out


@dataclass
class Permutation(UnitaryOp):
    dim: int
    mapping: list  # basis state k goes to mapping[k]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(self.dim)):
            raise ValueError("mapping must be a permutation of 0..dim-1")
        self.mapping = [int(k) for k in self.mapping]

    def dense(self) -> np.ndarray:
        u = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for k, target in enumerate(self.mapping):
            u[target, k] = 1.0
        return u

    def inverse(self) -> "Permutation":
        inv = [0] * self.dim
        for k, target in enumerate(self.mapping):
            inv[target] = k
        return Permutation(self.dim, inv)

    def apply_to(self, psi: np.ndarray) -> np.ndarray:
        out = np.empty_like(psi)
        for k, target in enumerate(self.mapping):
            out[target] = psi[k]
        return out


@dataclass
class Composition(UnitaryOp):
    dim: int
    parts: list  # applied first-to-last

    def __post_init__(self):
        for part in self.parts:
            if not isinstance(part, UnitaryOp):
                raise TypeError("composition parts must be UnitaryOp instances")
            if part.dim != self.dim:
                raise ValueError("composition parts disagree on dimension")

    def dense(self) -> np.ndarray:
        u = np.eye(self.dim, dtype=np.complex128)
        for part in self.parts:
            u = numkit.matmul(part.dense(), u)
        return u

    def inverse(self) -> "Composition":
        return Composition(self.dim, [p.inverse() for p in reversed(self.parts)])

    def apply_to(self, psi: np.ndarray) -> np.ndarray:
        out = psi
        for part in self.parts:
            out = part.apply_to(out)
        return out


def _check_dense_unitary(u: np.ndarray) -> np.ndarray:
    m = np.ascontiguousarray(u, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("dense operator must be square")
    defect = np.max(np.abs(numkit.matmul(m.conj().T, m) - np.eye(m.shape[0])))
    if defect > UNITARY_TOL:
        raise ValueError(f"matrix is not unitary (defect {float(defect):.3e})")
    return m


def apply(u, psi) -> np.ndarray:
    """phi = U psi for a UnitaryOp or an explicitly unitary dense matrix."""
    state = np.ascontiguousarray(psi, dtype=np.complex128)
    if state.ndim != 1:
        raise ValueError("state must be 1-D")
    if isinstance(u, UnitaryOp):
        if u.dim != state.shape[0]:
            raise ValueError("operator and state dimensions differ")
        return u.apply_to(state)
    m = _check_dense_unitary(u)
    if m.shape[1] != state.shape[0]:
        raise ValueError("operator and state dimensions differ")
    return numkit.matvec(m, state)


def overlap_probability(phi, psi) -> float:
    """|<phi, psi>|^2 for unit states."""
    a = as_state(phi)
    b = as_state(psi)
    if a.shape != b.shape:
        raise ValueError("states live in different dimensions")
    return abs(numkit.inner(a, b)) ** 2


def born_probabilities(psi, basis: ContextBasis) -> np.ndarray:
    """Measurement distribution of psi in a context basis."""
    from . import contexts
    return contexts.born_probabilities(psi, basis)


def _sample_cdf(probs: np.ndarray, u: float) -> int:
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, u, side="right"))
    return min(idx, probs.shape[0] - 1)


def measure(psi, basis: ContextBasis, rng: np.random.Generator):
    """One Born measurement: (outcome index, collapsed state).

    The collapsed state is the outcome's basis vector with its global phase
    fixed so the first nonzero amplitude is positive real.
    """
    probs = born_probabilities(psi, basis)
    outcome = _sample_cdf(probs, rng.random())
    collapsed = np.ascontiguousarray(basis.vectors[outcome], dtype=np.complex128).copy()
    for amp in collapsed:
        if abs(amp) > 1e-15:
            collapsed = collapsed * (np.conj(amp) / abs(amp))
            break
    return outcome, collapsed


def sample_outcomes(psi, basis: ContextBasis, rng: np.random.Generator,
                    n: int) -> np.ndarray:
    """n independent Born draws from one state (vectorized CDF inversion)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    probs = born_probabilities(psi, basis)
    cdf = np.cumsum(probs)
    draws = np.searchsorted(cdf, rng.random(n), side="right")
    return np.minimum(draws, probs.shape[0] - 1)


def quantum_attention_step(token_state, u: UnitaryOp, output_basis: ContextBasis,
                           rng: np.random.Generator) -> int:
    """Encode -> unitary evolve -> terminal measurement; returns the outcome.

    The only stochastic operation is the final measurement.
    """
    psi = as_state(token_state)
    phi = apply(u, psi)
    outcome, _ = measure(phi, output_basis, rng)
    return outcome


def classicality_bridge(z, t: float, phases=None) -> np.ndarray:
    """|amplitudes|^2 for logit-encoded states: the temperature softmax."""
    a = amplitudes_from_logits(z, t, phases)
    return np.abs(a) ** 2


# ---------------------------------------------------------------------------
# pipelines and their JSON circuit files


@dataclass
class Pipeline:
    stages: list               # UnitaryOp only; applied first-to-last
    output_basis: ContextBasis

    def __post_init__(self):
        for stage in self.stages:
            if not isinstance(stage, UnitaryOp):
                raise TypeError(
                    "pipeline stages must be UnitaryOp instances; nonlinear "
                    "steps are only allowed as the terminal measurement"
                )
            if stage.dim != self.output_basis.dim:
                raise ValueError("stage dimension differs from output basis")

    def evolve(self, token_state) -> np.ndarray:
        """The reversible part only: all stages, no measurement."""
        psi = as_state(token_state)
        if psi.shape[0] != self.output_basis.dim:
            raise ValueError("state dimension differs from pipeline")
        for stage in self.stages:
            psi = stage.apply_to(psi)
        return psi

    def run(self, token_state, rng: np.random.Generator):
        """(outcome index, word label, collapsed state, Born distribution)."""
        phi = self.evolve(token_state)
        probs = born_probabilities(phi, self.output_basis)
        outcome = _sample_cdf(probs, rng.random())
        collapsed = np.ascontiguousarray(
            self.output_basis.vectors[outcome], dtype=np.complex128
        )
        return outcome, self.output_basis.word_labels[outcome], collapsed, probs


def _stage_to_json(op: UnitaryOp) -> dict:
    if isinstance(op, PlaneRotation):
        return {"kind": "rotation", "i": op.i, "j": op.j,
                "theta": op.theta, "phase": op.phase}
    if isinstance(op, Permutation):
        return {"kind": "permutation", "mapping": list(op.mapping)}
    if isinstance(op, Composition):
        return {"kind": "composition", "parts": [_stage_to_json(p) for p in op.parts]}
    raise TypeError(f"unknown unitary kind: {type(op).__name__}")


def _stage_from_json(rec: dict, dim: int) -> UnitaryOp:
    kind = rec.get("kind")
    if kind == "rotation":
        return PlaneRotation(dim, int(rec["i"]), int(rec["j"]),
                             float(rec["theta"]), float(rec.get("phase", 0.0)))
    if kind == "permutation":
        return Permutation(dim, [int(k) for k in rec["mapping"]])
    if kind == "composition":
        return Composition(dim, [_stage_from_json(p, dim) for p in rec["parts"]])
    raise ValueError(f"unknown stage kind {kind!r} in circuit file")


def save_pipeline(path: str, pipeline: Pipeline) -> None:
    basis = pipeline.output_basis
    if basis.is_complex():
        coords = [[[z.real, z.imag] for z in row] for row in basis.vectors]
        fieldname = "complex"
    else:
        coords = [[float(x) for x in row] for row in basis.vectors]
        fieldname = "real"
    doc = {
        "dim": basis.dim,
        "stages": [_stage_to_json(op) for op in pipeline.stages],
        "output_basis": {
            "label": basis.label,
            "word_labels": list(basis.word_labels),
            "field": fieldname,
            "vectors": coords,
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_pipeline(path: str) -> Pipeline:
    with open(path) as fh:
        doc = json.load(fh)
    dim = int(doc["dim"])
    rec = doc["output_basis"]
    if rec["field"] == "complex":
        vectors = np.array(
            [[complex(re, im) for re, im in row] for row in rec["vectors"]]
        )
    else:
        vectors = np.array(rec["vectors"], dtype=np.float64)
    basis = ContextBasis(
        label=rec["label"], vectors=vectors, word_labels=list(rec["word_labels"]),
    )
    stages = [_stage_from_json(s, dim) for s in doc["stages"]]
    return Pipeline(stages=stages, output_basis=basis)
