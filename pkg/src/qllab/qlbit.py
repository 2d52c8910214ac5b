"""Two-level graph bits: construction, bias topologies, and projections.

A QL bit couples two regular subgraphs (blocks a1 and a2) through a sparse
set of cross edges.  The two hybridized top eigenstates then behave as an
effective two-level system; `project_two_state` reads the level amplitudes
off any eigenvector via the normalized block indicator vectors.

Cross-edge orientation convention: the adjacency entry from an a1 (blue)
vertex to an a2 (red) vertex equals the connecting bias, so a connecting
bias of i produces the emergent state |a2> + i|a1> at eigenvalue d.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    EmptySubgraphError,
    MissingLabelsError,
    PolicyInfeasibleError,
    QllabError,
)
from .graph import (
    BiasedGraph,
    GraphGenSpec,
    build_graph,
    derive_seed,
    gen_bipartite_d_regular,
    rng_from,
    sample_biregular_pairs,
)


# ----------------------------------------------------------------------
# Connection policies
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class PairProbability:
    """Each of the n*k cross pairs is an edge independently with probability p."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise QllabError(f"pair probability {self.p} outside [0, 1]")


@dataclass(frozen=True)
class EdgeBudgetFraction:
    """Exactly round(f * (n+k) * d / 2) cross edges, sampled uniformly.

    The budget is the given fraction of the edges a single d-regular graph
    on all n+k vertices would carry, computed from the blocks' actual edge
    counts (identical for regular blocks).
    """

    fraction: float

    def __post_init__(self):
        if self.fraction < 0.0:
            raise QllabError("budget fraction must be nonnegative")


@dataclass(frozen=True)
class CrossRegular:
    """Bipartite k-regular cross edges (requires equal block sizes).

    Keeps the block-indicator subspace exactly invariant, which pins the
    emergent eigenvalues and kills projection residuals.
    """

    degree: int

    def __post_init__(self):
        if self.degree < 0:
            raise QllabError("cross degree must be nonnegative")


def sample_cross_pairs(policy, n1, n2, rng):
    """Cross pairs (i in block1, j in block2) under the given policy."""
    if isinstance(policy, PairProbability):
        mask = rng.random(n1 * n2) < policy.p
        return [divmod(int(t), n2) for t in np.flatnonzero(mask)]
    if isinstance(policy, EdgeBudgetFraction):
        raise QllabError("budget policy needs block edge counts; use build_qlbit")
    if isinstance(policy, CrossRegular):
        if n1 != n2:
            raise PolicyInfeasibleError(
                "cross-regular policy needs equal block sizes"
            )
        if policy.degree > n1:
            raise PolicyInfeasibleError(
                f"cross degree {policy.degree} exceeds block size {n1}"
            )
        return sorted(sample_biregular_pairs(n1, policy.degree, rng))
    raise QllabError(f"unknown connect policy {policy!r}")


def _budget_pairs(budget, n1, n2, rng):
    if budget > n1 * n2:
        raise PolicyInfeasibleError(
            f"edge budget {budget} exceeds {n1 * n2} available cross pairs"
        )
    picks = rng.choice(n1 * n2, size=budget, replace=False)
    return [divmod(int(t), n2) for t in sorted(picks)]


# ----------------------------------------------------------------------
# QL bit construction
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class QLBitSpec:
    """Recipe for one QL bit.

    sub1/sub2 generate the a1 (blue) and a2 (red) blocks; connect_bias is
    the unit-modulus cross-edge bias (0 leaves the blocks disconnected);
    red_bias/blue_bias are +-1 signs applied to the intra-block edges.
    """

    sub1: GraphGenSpec
    sub2: GraphGenSpec
    connect_policy: object = field(default_factory=lambda: EdgeBudgetFraction(0.2))
    connect_bias: complex = 1.0 + 0.0j
    red_bias: float = 1.0
    blue_bias: float = 1.0
    seed: int = 0

    def __post_init__(self):
        mag = abs(complex(self.connect_bias))
        if mag != 0.0 and abs(mag - 1.0) > 1e-12:
            raise QllabError("connect bias must be unit modulus or zero")
        if abs(self.red_bias) != 1.0 or abs(self.blue_bias) != 1.0:
            raise QllabError("red/blue biases must be +1 or -1")


def qlbit_spec(n, d, policy=None, connect_bias=1.0, red_bias=1.0, blue_bias=1.0, seed=0):
    """Convenience constructor: two d-regular random blocks of n vertices each."""
    return QLBitSpec(
        sub1=GraphGenSpec("d_regular_random", n=n, d=d, seed=derive_seed(seed, "sub1")),
        sub2=GraphGenSpec("d_regular_random", n=n, d=d, seed=derive_seed(seed, "sub2")),
        connect_policy=policy if policy is not None else EdgeBudgetFraction(0.2),
        connect_bias=connect_bias,
        red_bias=red_bias,
        blue_bias=blue_bias,
        seed=seed,
    )


def build_qlbit(spec: QLBitSpec, block_names=("a1", "a2")) -> BiasedGraph:
    """Assemble the labeled QL bit graph from its spec.

    Block a1 occupies vertices 0..n-1, block a2 the rest.  Cross edges are
    sampled by the connect policy and all carry connect_bias, oriented
    a1 -> a2.
    """
    g1 = build_graph(spec.sub1)
    g2 = build_graph(spec.sub2)
    if g1.n == 0 or g2.n == 0:
        raise EmptySubgraphError("QL bit blocks must be nonempty")
    n1, n2 = g1.n, g2.n
    edges = [(u, v, b * spec.blue_bias) for u, v, b in g1.sorted_edges()]
    edges += [(u + n1, v + n1, b * spec.red_bias) for u, v, b in g2.sorted_edges()]

    conn = complex(spec.connect_bias)
    if conn != 0:
        rng = rng_from(spec.seed, "cross", n1, n2)
        if isinstance(spec.connect_policy, EdgeBudgetFraction):
            budget = int(round(spec.connect_policy.fraction * (g1.num_edges + g2.num_edges)))
            pairs = _budget_pairs(budget, n1, n2, rng)
        else:
            pairs = sample_cross_pairs(spec.connect_policy, n1, n2, rng)
        edges += [(i, n1 + j, conn) for i, j in pairs]

    labels = {
        block_names[0]: list(range(n1)),
        block_names[1]: list(range(n1, n1 + n2)),
    }
    diagonal = np.concatenate([g1.diagonal, g2.diagonal])
    return BiasedGraph.from_edges(n1 + n2, edges, diagonal=diagonal, labels=labels)


def build_type2_qlbit(n_per_side, d, seed, block_names=("a1", "a2")) -> BiasedGraph:
    """Bipartite d-regular QL bit; the two sides are the two levels.

    The emergent states sit at the spectrum extremes +-d and project to
    perfect superpositions (1, +-1)/sqrt(2).
    """
    g = gen_bipartite_d_regular(n_per_side, d, seed)
    labels = {
        block_names[0]: list(range(n_per_side)),
        block_names[1]: list(range(n_per_side, 2 * n_per_side)),
    }
    return g.with_labels(labels)


def build_regular_qlbit(
    n_per_side, d, cross_degree=1, seed=0, block_names=("a1", "a2")
) -> BiasedGraph:
    """QL bit that is exactly d-regular including its connecting edges.

    Both blocks are (d - cross_degree)-regular and the cross edges form a
    bipartite cross_degree-regular graph, so every vertex has total degree
    d.  This is the topology the Bloch-axis bias rows act on.
    """
    if cross_degree < 1 or cross_degree >= d:
        raise QllabError("need 1 <= cross_degree < d")
    intra = d - cross_degree
    spec = QLBitSpec(
        sub1=GraphGenSpec(
            "d_regular_random", n=n_per_side, d=intra, seed=derive_seed(seed, "blue")
        ),
        sub2=GraphGenSpec(
            "d_regular_random", n=n_per_side, d=intra, seed=derive_seed(seed, "red")
        ),
        connect_policy=CrossRegular(cross_degree),
        seed=seed,
    )
    return build_qlbit(spec, block_names=block_names)


# ----------------------------------------------------------------------
# Effective two-level projections
# ----------------------------------------------------------------------


@dataclass
class EffectiveTwoState:
    """Amplitudes of an eigenvector on the two block-indicator directions.

    residual is the norm of the eigenvector component outside
    span{J_a1, J_a2}; |alpha|^2 + |beta|^2 + residual^2 = 1 for unit input.
    """

    alpha: complex
    beta: complex
    residual: float

    def normalized(self) -> np.ndarray:
        vec = np.array([self.alpha, self.beta])
        norm = np.linalg.norm(vec)
        if norm < 1e-12:
            raise QllabError("projection too small to normalize")
        return vec / norm


def _two_blocks(g: BiasedGraph, block_names=None):
    if g.labels is None:
        raise MissingLabelsError("graph has no block labels")
    if block_names is None:
        if len(g.labels) != 2:
            raise MissingLabelsError(
                f"expected exactly two blocks, found {sorted(g.labels)}"
            )
        block_names = tuple(g.labels)
    for name in block_names:
        if name not in g.labels:
            raise MissingLabelsError(f"block {name!r} missing from labels")
    return block_names


def j_vectors(g: BiasedGraph, block_names=None):
    """Normalized indicator vectors (J_a1, J_a2) of the two blocks."""
    names = _two_blocks(g, block_names)
    out = []
    for name in names:
        verts = g.labels[name]
        vec = np.zeros(g.n)
        vec[list(verts)] = 1.0 / np.sqrt(len(verts))
        out.append(vec)
    return tuple(out)


def project_two_state(g: BiasedGraph, w, block_names=None) -> EffectiveTwoState:
    """Project a unit eigenvector onto the two-level block basis."""
    j1, j2 = j_vectors(g, block_names)
    w = np.asarray(w)
    alpha = complex(np.vdot(j1, w))
    beta = complex(np.vdot(j2, w))
    residual2 = float(np.vdot(w, w).real) - abs(alpha) ** 2 - abs(beta) ** 2
    return EffectiveTwoState(alpha, beta, float(np.sqrt(max(0.0, residual2))))


# ----------------------------------------------------------------------
# Bloch-axis bias topologies
# ----------------------------------------------------------------------

_BIAS_TOKENS = {
    "+1": 1 + 0j,
    "-1": -1 + 0j,
    "1": 1 + 0j,
    "i": 1j,
    "+i": 1j,
    "-i": -1j,
    "0": 0j,
}


def bias_from_token(token) -> complex:
    """Parse a config bias token: one of +1, -1, i, -i, 0."""
    if isinstance(token, (int, float, complex)):
        return complex(token)
    try:
        return _BIAS_TOKENS[str(token).strip()]
    except KeyError:
        raise QllabError(f"unknown bias token {token!r}") from None


@dataclass(frozen=True)
class BiasTopology:
    """Edge biases of one Bloch-axis projection row.

    red applies to edges inside the a2 block, blue inside a1, conn to the
    connecting edges (0 removes them).
    """

    red: complex
    blue: complex
    conn: complex

    def __post_init__(self):
        for name, value in (("red", self.red), ("blue", self.blue)):
            if complex(value) not in (1 + 0j, -1 + 0j):
                raise QllabError(f"{name} bias must be +1 or -1")
        mag = abs(complex(self.conn))
        if mag != 0.0 and abs(mag - 1.0) > 1e-12:
            raise QllabError("connecting bias must be unit modulus or zero")

    @classmethod
    def from_config(cls, doc: dict) -> "BiasTopology":
        return cls(
            red=bias_from_token(doc["red"]),
            blue=bias_from_token(doc["blue"]),
            conn=bias_from_token(doc["conn"]),
        )


# The six canonical rows: for each Bloch axis, the +|d| and -|d| member.
BLOCH_PROJECTIONS = {
    "x+": BiasTopology(red=1, blue=1, conn=1),
    "x-": BiasTopology(red=-1, blue=-1, conn=1),
    "y+": BiasTopology(red=1, blue=1, conn=1j),
    "y-": BiasTopology(red=-1, blue=-1, conn=1j),
    "z+": BiasTopology(red=1, blue=1, conn=0),
    "z-": BiasTopology(red=-1, blue=-1, conn=0),
}

# Target effective states (alpha, beta) and eigenvalue signs for the rows,
# with alpha on |a1> and beta on |a2>.
BLOCH_TARGETS = {
    "x+": (+1, np.array([1, 1]) / np.sqrt(2)),
    "x-": (-1, np.array([-1, 1]) / np.sqrt(2)),
    "y+": (+1, np.array([1j, 1]) / np.sqrt(2)),
    "y-": (-1, np.array([-1j, 1]) / np.sqrt(2)),
    "z+": (+1, np.array([0, 1])),
    "z-": (-1, np.array([1, 0])),
}


def apply_bias_topology(g: BiasedGraph, topology: BiasTopology, block_names=None) -> BiasedGraph:
    """Overwrite intra- and cross-block biases according to a projection row.

    The graph should be d-regular including its connecting edges (see
    build_regular_qlbit).  A connecting bias of zero removes the cross
    edges.  Orientation: A[a1, a2] = conn.
    """
    names = _two_blocks(g, block_names)
    in_blue = np.zeros(g.n, dtype=bool)
    in_blue[list(g.labels[names[0]])] = True
    in_red = np.zeros(g.n, dtype=bool)
    in_red[list(g.labels[names[1]])] = True

    conn = complex(topology.conn)
    edges = {}
    for (u, v), _ in g.edges.items():
        if in_blue[u] and in_blue[v]:
            edges[(u, v)] = complex(topology.blue)
        elif in_red[u] and in_red[v]:
            edges[(u, v)] = complex(topology.red)
        else:
            if conn == 0:
                continue
            edges[(u, v)] = conn if in_blue[u] else conn.conjugate()
    return g.replace_edges(edges)


def rotated_connecting_bias(spec: QLBitSpec, phi: float) -> QLBitSpec:
    """Spec copy with connecting bias e^{i phi} (the Bloch-equator sweep)."""
    return replace(spec, connect_bias=complex(np.cos(phi), np.sin(phi)))
