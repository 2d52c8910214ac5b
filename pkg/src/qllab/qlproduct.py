"""Cartesian products of QL bits, contracted products, and multi-bit projections.

Basis convention: with q bits named a, b, c, ... the 2^q product basis is
enumerated with the FIRST bit varying fastest, i.e. a1b1, a2b1, a1b2, a2b2
for q = 2.  Block labels concatenate per-bit names ("a1b2").  Vertex order
inside a product follows the same rule: the index of (u, x) in g [] h is
x * |g| + u.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import MissingLabelsError, PolicyInfeasibleError, QllabError
from .graph import BiasedGraph, derive_seed, gen_d_regular_random, rng_from
from .qlbit import EdgeBudgetFraction, build_qlbit, sample_cross_pairs
from .spectral import eigendecompose

BIT_NAMES = "abcdefgh"

_LABEL_RE = re.compile(r"([a-zA-Z]+?)([12])")


# ----------------------------------------------------------------------
# Cartesian product
# ----------------------------------------------------------------------


def cartesian_product(g: BiasedGraph, h: BiasedGraph) -> BiasedGraph:
    """Graph Cartesian product g [] h.

    (u, x) ~ (v, y) iff u ~ v and x = y, or x ~ y and u = v, inheriting the
    contributing edge's bias.  Diagonals add; labels combine blockwise when
    both factors are labeled.
    """
    if g.n == 0 or h.n == 0:
        raise QllabError("product factors must be nonempty")
    gn = g.n
    edges = []
    for x in range(h.n):
        off = x * gn
        edges += [(u + off, v + off, b) for u, v, b in g.sorted_edges()]
    for x, y, b in h.sorted_edges():
        xo, yo = x * gn, y * gn
        edges += [(xo + u, yo + u, b) for u in range(gn)]
    diagonal = np.add.outer(h.diagonal, g.diagonal).ravel()
    labels = None
    if g.labels is not None and h.labels is not None:
        labels = {}
        for hname, hverts in h.labels.items():
            for gname, gverts in g.labels.items():
                labels[gname + hname] = [
                    x * gn + u for x in hverts for u in gverts
                ]
    return BiasedGraph.from_edges(g.n * h.n, edges, diagonal=diagonal, labels=labels)


def verify_spectrum_composition(g, h, tol=1e-8, n_samples=5, seed=0) -> bool:
    """Check that spectrum(g [] h) is the multiset {lambda_i + mu_j}.

    Also verifies, for n_samples random index pairs, that the tensor of the
    factor eigenvectors satisfies the product eigen-equation within tol.
    """
    sg, sh = eigendecompose(g), eigendecompose(h)
    prod = cartesian_product(g, h)
    sp = eigendecompose(prod)
    expected = np.sort(np.add.outer(sg.eigenvalues, sh.eigenvalues).ravel())
    actual = np.sort(sp.eigenvalues)
    if not np.allclose(expected, actual, atol=tol, rtol=0.0):
        return False
    a = prod.adjacency()
    rng = rng_from(seed, "spectrum_composition")
    for _ in range(n_samples):
        i = int(rng.integers(g.n))
        j = int(rng.integers(h.n))
        w = np.kron(sh.eigenvectors[:, j], sg.eigenvectors[:, i])
        lam = sg.eigenvalues[i] + sh.eigenvalues[j]
        if np.linalg.norm(a @ w - lam * w) > tol * max(1.0, abs(lam)):
            return False
    return True


# ----------------------------------------------------------------------
# Product specs and builders
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ProductSpec:
    """Ordered list of QL bits plus the product mode.

    In contracted mode every one of the 2^q effective blocks is an
    independent d-regular random graph on n vertices (n, d taken from the
    fields below, falling back to the first bit's sub1 spec), and blocks
    whose labels differ in exactly one position are connected using that
    bit's policy and bias.
    """

    qlbits: tuple
    mode: str = "full"
    n: int = None
    d: int = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "qlbits", tuple(self.qlbits))
        if len(self.qlbits) < 1:
            raise QllabError("need at least one QL bit")
        if self.mode not in ("full", "contracted"):
            raise QllabError(f"unknown product mode {self.mode!r}")
        if len(self.qlbits) > len(BIT_NAMES):
            raise QllabError(f"at most {len(BIT_NAMES)} bits supported")

    @property
    def q(self) -> int:
        return len(self.qlbits)

    def block_size(self) -> int:
        return self.n if self.n is not None else self.qlbits[0].sub1.n

    def block_degree(self) -> int:
        return self.d if self.d is not None else self.qlbits[0].sub1.implied_degree()


def bit_values(k: int, q: int):
    """Label values (1 or 2 per bit) of basis index k; first bit fastest."""
    return tuple(1 + ((k >> j) & 1) for j in range(q))


def basis_index(values) -> int:
    return sum((v - 1) << j for j, v in enumerate(values))


def block_label(values, names=BIT_NAMES) -> str:
    return "".join(f"{names[j]}{v}" for j, v in enumerate(values))


def parse_block_label(label: str):
    """Split a block label like 'a1b2' into (('a', 'b'), (1, 2))."""
    parts = _LABEL_RE.findall(label)
    if "".join(f"{n}{v}" for n, v in parts) != label:
        raise MissingLabelsError(f"cannot parse block label {label!r}")
    names = tuple(n for n, _ in parts)
    values = tuple(int(v) for _, v in parts)
    return names, values


def build_full_product(spec: ProductSpec) -> BiasedGraph:
    """Full Cartesian product of the QL bit graphs (N^q vertices)."""
    graphs = []
    for j, bit in enumerate(spec.qlbits):
        name = BIT_NAMES[j]
        graphs.append(build_qlbit(bit, block_names=(f"{name}1", f"{name}2")))
    return reduce(cartesian_product, graphs)


def build_contracted_product(spec: ProductSpec) -> BiasedGraph:
    """Contracted product: one n-vertex d-regular block per basis label.

    Blocks at labels differing in one position are joined with the policy
    and bias of the bit at that position; the label connection graph is the
    q-dimensional hypercube.  Block and cross samples are all independent,
    keyed on the label ("the precise structures do not matter"); with the
    cross-regular policy the block-indicator subspace is exactly invariant,
    which makes the middle eigenvalue pair of a two-bit product with
    matching cross degrees exactly degenerate.
    """
    if spec.mode != "contracted":
        raise QllabError("spec mode is not 'contracted'")
    q = spec.q
    n = spec.block_size()
    d = spec.block_degree()
    if n is None or d is None:
        raise QllabError("contracted product needs block size and degree")
    nblocks = 1 << q

    edges = []
    labels = {}
    for k in range(nblocks):
        values = bit_values(k, q)
        name = block_label(values)
        offset = k * n
        labels[name] = list(range(offset, offset + n))
        block = gen_d_regular_random(n, d, derive_seed(spec.seed, "block", values))
        intra = 1.0
        for j, v in enumerate(values):
            bit = spec.qlbits[j]
            intra *= bit.blue_bias if v == 1 else bit.red_bias
        edges += [(u + offset, v + offset, b * intra) for u, v, b in block.sorted_edges()]

    for k in range(nblocks):
        values = bit_values(k, q)
        for j in range(q):
            if values[j] != 1:
                continue
            partner = k | (1 << j)
            bit = spec.qlbits[j]
            conn = complex(bit.connect_bias)
            if conn == 0:
                continue
            others = tuple(v for t, v in enumerate(values) if t != j)
            rng = rng_from(spec.seed, "cross", j, others)
            policy = bit.connect_policy
            if isinstance(policy, EdgeBudgetFraction):
                budget = int(round(policy.fraction * n * d))
                if budget > n * n:
                    raise PolicyInfeasibleError(
                        f"edge budget {budget} exceeds {n * n} cross pairs"
                    )
                picks = rng.choice(n * n, size=budget, replace=False)
                pairs = [divmod(int(t), n) for t in sorted(picks)]
            else:
                pairs = sample_cross_pairs(policy, n, n, rng)
            # Orientation: value-1 block -> value-2 block carries the bias.
            edges += [(k * n + i, partner * n + jdx, conn) for i, jdx in pairs]

    return BiasedGraph.from_edges(nblocks * n, edges, labels=labels)


def build_product(spec: ProductSpec) -> BiasedGraph:
    return build_full_product(spec) if spec.mode == "full" else build_contracted_product(spec)


def label_adjacency(g: BiasedGraph):
    """Set of unordered block-name pairs joined by at least one edge."""
    if g.labels is None:
        raise MissingLabelsError("graph has no block labels")
    owner = {}
    for name, verts in g.labels.items():
        for v in verts:
            owner[v] = name
    pairs = set()
    for u, v in g.edges:
        a, b = owner[u], owner[v]
        if a != b:
            pairs.add(frozenset((a, b)))
    return pairs


# ----------------------------------------------------------------------
# Product-basis projections
# ----------------------------------------------------------------------


def product_basis_labels(g: BiasedGraph):
    """Block labels of g in canonical basis order (first bit fastest)."""
    if g.labels is None:
        raise MissingLabelsError("graph has no block labels")
    by_values = {}
    names_ref = None
    for label in g.labels:
        names, values = parse_block_label(label)
        if names_ref is None:
            names_ref = names
        elif names != names_ref:
            raise MissingLabelsError(
                f"inconsistent bit names: {names_ref} vs {names}"
            )
        by_values[values] = label
    q = len(names_ref)
    if len(by_values) != (1 << q):
        raise MissingLabelsError(
            f"expected {1 << q} blocks for {q} bits, found {len(by_values)}"
        )
    return [by_values[bit_values(k, q)] for k in range(1 << q)]


def product_j_vectors(g: BiasedGraph) -> np.ndarray:
    """Columns: normalized block indicators in canonical basis order.

    Vertex membership is read from the labels, never assumed contiguous.
    """
    ordered = product_basis_labels(g)
    j = np.zeros((g.n, len(ordered)))
    for col, label in enumerate(ordered):
        verts = list(g.labels[label])
        j[verts, col] = 1.0 / np.sqrt(len(verts))
    return j


@dataclass
class EffectiveProductState:
    """Coefficients of an eigenvector in the 2^q product basis."""

    coefficients: np.ndarray
    residual: float
    labels: list = field(default_factory=list)

    def normalized(self) -> np.ndarray:
        norm = np.linalg.norm(self.coefficients)
        if norm < 1e-12:
            raise QllabError("projection too small to normalize")
        return self.coefficients / norm


def project_product_state(g: BiasedGraph, w) -> EffectiveProductState:
    """Project a unit eigenvector onto all block indicators."""
    j = product_j_vectors(g)
    w = np.asarray(w)
    coeffs = j.T.conj() @ w
    residual2 = float(np.vdot(w, w).real) - float(np.vdot(coeffs, coeffs).real)
    return EffectiveProductState(
        coefficients=coeffs.astype(complex),
        residual=float(np.sqrt(max(0.0, residual2))),
        labels=product_basis_labels(g),
    )


def sign_pattern_states(q: int = 2) -> dict:
    """The 2^q equal-weight sign-pattern states, keyed by per-bit signs.

    Key "+-" means bit a symmetric, bit b antisymmetric; component k of the
    vector is the product over bits of (sign_j if bit j of k is in state 2).
    """
    out = {}
    dim = 1 << q
    for mask in range(dim):
        signs = tuple(-1 if (mask >> j) & 1 else 1 for j in range(q))
        key = "".join("+" if s > 0 else "-" for s in signs)
        vec = np.ones(dim)
        for k in range(dim):
            for j, v in enumerate(bit_values(k, q)):
                if v == 2:
                    vec[k] *= signs[j]
        out[key] = vec / np.sqrt(dim)
    return out


def apply_subgraph_detuning(g: BiasedGraph, omega1: float, omega2: float) -> BiasedGraph:
    """Add per-bit level frequencies to the diagonal.

    Every vertex gains omega1 for each bit whose label value is 1 and
    omega2 for each value-2 bit, so in a two-bit product the a1b1 block
    shifts by 2*omega1 and the a1b2 block by omega1 + omega2.
    """
    if g.labels is None:
        raise MissingLabelsError("graph has no block labels")
    diagonal = g.diagonal.copy()
    for label, verts in g.labels.items():
        _, values = parse_block_label(label)
        shift = sum(omega1 if v == 1 else omega2 for v in values)
        diagonal[list(verts)] += shift
    out = g.replace_edges(g.edges)
    out.diagonal = diagonal
    return out


def apply_alignment_detuning(g: BiasedGraph, omega1: float, omega2: float) -> BiasedGraph:
    """Shift only the aligned blocks: all-1 blocks by omega1, all-2 by omega2.

    Unlike the per-bit additive rule, this moves the aligned product states
    as a pair relative to the mixed ones, which couples the bits (the
    effective Hamiltonian gains an interaction term) and lets the emergent
    state acquire partial entanglement.  The per-bit additive rule keeps
    the effective Hamiltonian a sum of single-bit terms, so its emergent
    state stays a product state.
    """
    if g.labels is None:
        raise MissingLabelsError("graph has no block labels")
    diagonal = g.diagonal.copy()
    for label, verts in g.labels.items():
        _, values = parse_block_label(label)
        if all(v == 1 for v in values):
            diagonal[list(verts)] += omega1
        elif all(v == 2 for v in values):
            diagonal[list(verts)] += omega2
    out = g.replace_edges(g.edges)
    out.diagonal = diagonal
    return out
