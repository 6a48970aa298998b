"""Contexts as orthonormal bases, observables, and Born-rule readout.

A context is a complete orthonormal basis with one word label per vector; a
maximal observable is such a basis plus a real eigenvalue per vector. Two
contexts intertwine when they share a vector (coordinate-equal, not merely
parallel); a token vector shared this way gets Born probability 1 in both.
Disambiguation of a static token vector is measurement: pick a context, read
the Born distribution over its word labels.

Everything is real-field by default; complex bases are accepted for reuse by
the unitary pipeline. Non-orthonormal inputs are rejected at construction; a
Gram-Schmidt repair path exists but always logs what it changed.
"""

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import numkit

log = logging.getLogger(__name__)

ORTHO_TOL = 1e-12
SHARED_TOL = 1e-12
NORM_TOL = 1e-9


def _gram_defect(vectors: np.ndarray) -> float:
    gram = numkit.matmul(vectors, vectors.conj().T)
    return float(np.max(np.abs(gram - np.eye(vectors.shape[0]))))


@dataclass
class ContextBasis:
    label: str
    vectors: np.ndarray      # rows are the basis vectors; square
    word_labels: list

    def __post_init__(self):
        v = np.asarray(self.vectors)
        if v.dtype.kind == 'c':
            v = np.ascontiguousarray(v, dtype=np.complex128)
        else:
            v = np.ascontiguousarray(v, dtype=np.float64)
        self.vectors = v
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(
                "a context must be a complete basis: vector count = dimension"
            )
        if len(self.word_labels) != v.shape[0]:
            raise ValueError("need exactly one word label per basis vector")
        defect = _gram_defect(v)
        if defect > ORTHO_TOL:
            raise ValueError(
                f"basis {self.label!r} is not orthonormal "
                f"(max Gram deviation {defect:.3e}); use repair_basis"
            )

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def is_complex(self) -> bool:
        return self.vectors.dtype.kind == 'c'


def gram_schmidt(vectors: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt on rows; raises if the rows are rank-deficient."""
    v = np.array(vectors, dtype=complex if np.iscomplexobj(vectors) else float)
    if v.ndim != 2:
        raise ValueError("expected a 2-D array of row vectors")
    n = v.shape[0]
    for i in range(n):
        for j in range(i):
            v[i] = v[i] - numkit.inner(v[j], v[i]) * v[j]
        nrm = numkit.norm(v[i])
        if nrm < 1e-10:
            raise ValueError(f"row {i} is linearly dependent on earlier rows")
        v[i] = v[i] / nrm
    return v


def repair_basis(label: str, vectors, word_labels) -> ContextBasis:
    """Orthonormalize near-basis rows; the repair is logged, never silent."""
    raw = np.asarray(vectors)
    before = _gram_defect(
        np.ascontiguousarray(raw, dtype=complex if np.iscomplexobj(raw) else float)
    )
    fixed = gram_schmidt(raw)
    log.warning(
        "repaired basis %r by Gram-Schmidt: max Gram deviation %.3e -> %.3e",
        label, before, _gram_defect(fixed),
    )
    return ContextBasis(label=label, vectors=fixed, word_labels=list(word_labels))


@dataclass
class Observable:
    basis: ContextBasis
    eigenvalues: np.ndarray
    matrix: np.ndarray = field(init=False)

    def __post_init__(self):
        eig = np.asarray(self.eigenvalues, dtype=np.float64)
        if eig.shape != (self.basis.dim,):
            raise ValueError("need exactly one eigenvalue per basis vector")
        self.eigenvalues = eig
        v = self.basis.vectors
        m = np.zeros((self.basis.dim, self.basis.dim), dtype=v.dtype)
        for lam, row in zip(eig, v):
            m = m + lam * np.outer(row, np.conj(row))
        self.matrix = m


def make_observable(basis: ContextBasis, eigenvalues) -> Observable:
    """Spectral assembly: sum of eigenvalue times projector per basis vector."""
    return Observable(basis=basis, eigenvalues=eigenvalues)


def commutator_norm(a: Observable, b: Observable) -> float:
    """Frobenius norm of AB - BA on the dense matrix forms."""
    if a.basis.dim != b.basis.dim:
        raise ValueError("observables live in different dimensions")
    ab = numkit.matmul(a.matrix, b.matrix)
    ba = numkit.matmul(b.matrix, a.matrix)
    return numkit.frob_norm(ab - ba)


def born_probabilities(psi, basis: ContextBasis) -> np.ndarray:
    """p(i) = |<e_i, psi>|^2 for a unit state psi; sums to 1 by completeness."""
    vec = np.asarray(psi)
    if vec.shape != (basis.dim,):
        raise ValueError("state dimension does not match the basis")
    nrm = numkit.norm(vec)
    if abs(nrm - 1.0) > NORM_TOL:
        raise ValueError(f"state norm {nrm!r} is not 1 within {NORM_TOL}")
    probs = np.empty(basis.dim, dtype=np.float64)
    for i in range(basis.dim):
        amp = numkit.inner(basis.vectors[i], vec)
        probs[i] = abs(amp) ** 2
    return probs


# ---------------------------------------------------------------------------
# graphs of intertwining contexts


@dataclass
class SharedVector:
    vector: np.ndarray
    members: list  # [(basis_index, position)], length >= 2


@dataclass
class ContextGraph:
    bases: list
    shared: list = field(default_factory=list)


@dataclass
class IntertwineReport:
    ok: bool
    dimension: int
    shared_count: int
    max_multiplicity: int
    messages: list


def build_context_graph(bases) -> ContextGraph:
    """Collect cross-basis shared vectors by exact-coordinate comparison."""
    if not bases:
        raise ValueError("graph needs at least one basis")
    dim = bases[0].dim
    for basis in bases:
        if basis.dim != dim:
            raise ValueError("all bases in a graph must share a dimension")
    shared = []
    for bi, basis in enumerate(bases):
        for pos in range(dim):
            vec = basis.vectors[pos]
            hit = None
            for rec in shared:
                if np.max(np.abs(rec.vector - vec)) <= SHARED_TOL:
                    hit = rec
                    break
            if hit is not None:
                hit.members.append((bi, pos))
                continue
            for bj in range(bi + 1, len(bases)):
                diffs = np.max(np.abs(bases[bj].vectors - vec), axis=1)
                if np.min(diffs) <= SHARED_TOL:
                    shared.append(SharedVector(vector=vec.copy(), members=[(bi, pos)]))
                    break
    return ContextGraph(bases=list(bases), shared=shared)


def intertwine_check(graph: ContextGraph) -> IntertwineReport:
    """Re-verify every shared record and the dimension-3 floor."""
    if not graph.bases:
        raise ValueError("graph is empty")
    dim = graph.bases[0].dim
    messages = []
    max_mult = 0
    for rec in graph.shared:
        if len(rec.members) < 2:
            raise ValueError("shared record with fewer than two memberships")
        max_mult = max(max_mult, len(rec.members))
        for bi, pos in rec.members:
            dev = float(np.max(np.abs(graph.bases[bi].vectors[pos] - rec.vector)))
            if dev > SHARED_TOL:
                raise ValueError(
                    f"claimed shared vector fails coordinate match in basis "
                    f"{graph.bases[bi].label!r} position {pos} (deviation {dev:.3e})"
                )
    ok = True
    if graph.shared and dim < 3:
        ok = False
        messages.append(
            "nontrivial intertwining claimed in dimension < 3; "
            "distinct complete bases cannot share a vector there"
        )
    if not graph.shared:
        messages.append("no shared vectors; bases are disjoint")
    return IntertwineReport(
        ok=ok, dimension=dim, shared_count=len(graph.shared),
        max_multiplicity=max_mult, messages=messages,
    )


def disambiguate(token_vector, graph: ContextGraph, context_label: str):
    """(best word label, Born distribution) of the token in the named context."""
    for basis in graph.bases:
        if basis.label == context_label:
            probs = born_probabilities(token_vector, basis)
            best = int(np.argmax(probs))
            return basis.word_labels[best], probs
    raise ValueError(f"unknown context label {context_label!r}")


# ---------------------------------------------------------------------------
# ready-made constructions


def standard_basis(word_labels, label: str = "standard") -> ContextBasis:
    return ContextBasis(
        label=label,
        vectors=np.eye(len(word_labels)),
        word_labels=list(word_labels),
    )


def rotated_basis(theta: float, word_labels=None,
                  label: str = "rotated") -> ContextBasis:
    """First two axes rotated clockwise around z by theta; third axis kept.

    theta = pi/4 gives f1 = (1, -1, 0)/sqrt(2), f2 = (1, 1, 0)/sqrt(2),
    f3 = e3: the classic intertwined partner of the standard basis.
    """
    c = math.cos(theta)
    s = math.sin(theta)
    vectors = np.array([
        [c, -s, 0.0],
        [s, c, 0.0],
        [0.0, 0.0, 1.0],
    ])
    if word_labels is None:
        word_labels = ["f1", "f2", "f3"]
    return ContextBasis(label=label, vectors=vectors, word_labels=list(word_labels))


def ef_pair() -> ContextGraph:
    """The standard basis and its pi/4-rotated partner, sharing the z axis."""
    e = standard_basis(["e1", "e2", "e3"], label="e")
    f = rotated_basis(math.pi / 4.0, label="f")
    return build_context_graph([e, f])


_BANK_CONTEXTS = (
    ("finance", "economy", "money", np.array([1.0, 0.0, 0.0])),
    ("geography", "river", "water", np.array([0.0, 1.0, 0.0])),
    ("furniture", "seat", "bench", np.array([0.0, 0.0, 1.0])),
)


def bank_graph() -> ContextGraph:
    """Three d=3 contexts intertwined in one shared vector v(bank).

    Each context pairs the same bank vector with a different sense direction:
    finance (economy), geography (river), furniture (seat).
    """
    v_bank = np.full(3, 1.0 / math.sqrt(3.0))
    bases = []
    for label, sense, third, aux in _BANK_CONTEXTS:
        rows = gram_schmidt(np.vstack([v_bank, aux, np.roll(aux, 1)]))
        rows[0] = v_bank  # keep the shared vector bit-identical across bases
        bases.append(ContextBasis(
            label=label, vectors=rows, word_labels=["bank", sense, third],
        ))
    return build_context_graph(bases)


# ---------------------------------------------------------------------------
# JSON persistence: bases with full-precision coordinates


def save_graph(path: str, graph: ContextGraph) -> None:
    doc = {"bases": []}
    for basis in graph.bases:
        if basis.is_complex():
            coords = [
                [[float(z.real), float(z.imag)] for z in row]
                for row in basis.vectors
            ]
            fieldname = "complex"
        else:
            coords = [[float(x) for x in row] for row in basis.vectors]
            fieldname = "real"
        doc["bases"].append({
            "label": basis.label,
            "word_labels": list(basis.word_labels),
            "field": fieldname,
            "vectors": coords,
        })
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_graph(path: str) -> ContextGraph:
    with open(path) as fh:
        doc = json.load(fh)
    bases = []
    for rec in doc["bases"]:
        if rec["field"] == "complex":
            vectors = np.array(
                [[complex(re, im) for re, im in row] for row in rec["vectors"]]
            )
        else:
            vectors = np.array(rec["vectors"], dtype=np.float64)
        bases.append(ContextBasis(
            label=rec["label"], vectors=vectors,
            word_labels=list(rec["word_labels"]),
        ))
    return build_context_graph(bases)
