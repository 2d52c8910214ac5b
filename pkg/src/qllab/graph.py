"""Complex-edge-biased graphs: containers, generators, and mutations.

Edges are stored once per unordered pair with u < v; the stored bias is the
adjacency entry A[u, v] and the conjugate entry is implied, so every graph is
Hermitian by construction.  All randomized operations take an explicit seed
and derive a private generator from it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleDegreeError, QllabError, RetryExhaustedError

_MAX_RESTARTS = 10_000
_MAX_REPAIR_ROUNDS = 200


def derive_seed(*parts) -> int:
    """Deterministic 63-bit seed from an arbitrary tuple of hashable parts."""
    text = "/".join(repr(p) for p in parts)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def rng_from(*parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))


@dataclass
class BiasedGraph:
    """Undirected graph with complex edge biases and a real diagonal.

    Attributes
    ----------
    n : int
        Number of vertices, indexed 0..n-1.
    edges : dict[(int, int), complex]
        Bias A[u, v] for each edge with u < v.  A[v, u] = conj(A[u, v]).
    diagonal : ndarray, shape (n,)
        Real per-vertex offsets (frequency disorder, detuning).
    labels : dict[str, list[int]] or None
        Optional partition of the vertices into named blocks.

    Graphs are treated as immutable after construction; every mutating
    operation in this module returns a new instance.
    """

    n: int
    edges: dict = field(default_factory=dict)
    diagonal: np.ndarray = None
    labels: dict = None

    def __post_init__(self):
        if self.n < 0:
            raise QllabError("vertex count must be nonnegative")
        if self.diagonal is None:
            self.diagonal = np.zeros(self.n)
        else:
            self.diagonal = np.asarray(self.diagonal, dtype=float)
            if self.diagonal.shape != (self.n,):
                raise QllabError("diagonal length must equal vertex count")
        if self.labels is not None:
            _check_partition(self.n, self.labels)

    @classmethod
    def from_edges(cls, n, edge_list, diagonal=None, labels=None):
        """Build a graph from (u, v) or (u, v, bias) tuples.

        Pairs are normalized to u < v (conjugating the bias when the input
        orientation is reversed).  Self loops and duplicate pairs raise.
        """
        edges = {}
        for item in edge_list:
            if len(item) == 2:
                u, v = item
                bias = 1.0 + 0.0j
            else:
                u, v, bias = item
                bias = complex(bias)
            if u == v:
                raise QllabError(f"self loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise QllabError(f"edge ({u}, {v}) out of range for n={n}")
            if u > v:
                u, v = v, u
                bias = bias.conjugate()
            if (u, v) in edges:
                raise QllabError(f"duplicate edge ({u}, {v})")
            if bias == 0:
                raise QllabError(f"zero bias on edge ({u}, {v})")
            edges[(u, v)] = bias
        return cls(n=n, edges=edges, diagonal=diagonal, labels=labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self):
        """Edges as a list of (u, v, bias), sorted by (u, v)."""
        return [(u, v, self.edges[(u, v)]) for u, v in sorted(self.edges)]

    def degrees(self) -> np.ndarray:
        """Per-vertex edge count (bias values ignored)."""
        deg = np.zeros(self.n, dtype=int)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        """Dense Hermitian adjacency matrix, diagonal included."""
        a = np.zeros((self.n, self.n), dtype=complex)
        for (u, v), bias in self.edges.items():
            a[u, v] = bias
            a[v, u] = bias.conjugate()
        a[np.diag_indices(self.n)] = self.diagonal
        return a

    def with_labels(self, labels) -> "BiasedGraph":
        _check_partition(self.n, labels)
        return BiasedGraph(self.n, dict(self.edges), self.diagonal.copy(), labels)

    def replace_edges(self, edges) -> "BiasedGraph":
        labels = None if self.labels is None else {k: list(v) for k, v in self.labels.items()}
        return BiasedGraph(self.n, dict(edges), self.diagonal.copy(), labels)

    def neighbors(self, v) -> list:
        out = []
        for u, w in self.edges:
            if u == v:
                out.append(w)
            elif w == v:
                out.append(u)
        return out


def _check_partition(n, labels):
    seen = set()
    for name, verts in labels.items():
        block = set(verts)
        if len(block) != len(verts):
            raise QllabError(f"label block {name!r} repeats vertices")
        if block & seen:
            raise QllabError(f"label block {name!r} overlaps another block")
        if any(not (0 <= v < n) for v in block):
            raise QllabError(f"label block {name!r} has out-of-range vertices")
        seen |= block
    if seen and seen != set(range(n)):
        raise QllabError("label blocks must cover all vertices")


@dataclass(frozen=True)
class GraphGenSpec:
    """Recipe for a deterministic graph sample.

    kind is one of 'd_regular_random', 'cycle', 'complete',
    'bipartite_d_regular', or 'two_lift' (with `base` set).  For the
    bipartite kind, `n` counts vertices per side.
    """

    kind: str
    n: int = 0
    d: int = None
    seed: int = 0
    base: "GraphGenSpec" = None

    def implied_degree(self) -> int:
        if self.kind in ("d_regular_random", "bipartite_d_regular"):
            return self.d
        if self.kind == "cycle":
            return 2
        if self.kind == "complete":
            return self.n - 1
        if self.kind == "two_lift":
            return self.base.implied_degree()
        raise QllabError(f"unknown graph kind {self.kind!r}")

    def num_vertices(self) -> int:
        if self.kind == "bipartite_d_regular":
            return 2 * self.n
        if self.kind == "two_lift":
            return 2 * self.base.num_vertices()
        return self.n


def build_graph(spec: GraphGenSpec) -> BiasedGraph:
    """Materialize a GraphGenSpec."""
    if spec.kind == "d_regular_random":
        return gen_d_regular_random(spec.n, spec.d, spec.seed)
    if spec.kind == "cycle":
        return gen_cycle(spec.n)
    if spec.kind == "complete":
        return gen_complete(spec.n)
    if spec.kind == "bipartite_d_regular":
        return gen_bipartite_d_regular(spec.n, spec.d, spec.seed)
    if spec.kind == "two_lift":
        return two_lift(build_graph(spec.base), spec.seed)
    raise QllabError(f"unknown graph kind {spec.kind!r}")


# ----------------------------------------------------------------------
# Generators
# ----------------------------------------------------------------------


def _pairing_attempt(n, d, rng):
    """One configuration-model attempt with stub repair; None on dead end."""
    edges = set()
    stubs = np.repeat(np.arange(n), d)
    rounds = 0
    while stubs.size:
        rounds += 1
        if rounds > _MAX_REPAIR_ROUNDS:
            return None
        rng.shuffle(stubs)
        leftover = []
        progressed = False
        for a, b in zip(stubs[0::2], stubs[1::2]):
            u, v = (int(a), int(b)) if a < b else (int(b), int(a))
            if u == v or (u, v) in edges:
                leftover.append(u)
                leftover.append(v)
            else:
                edges.add((u, v))
                progressed = True
        if leftover and not progressed:
            # Dead end unless some leftover pair is still placeable.
            values = sorted(set(leftover))
            ok = any(
                (values[i], values[j]) not in edges
                for i in range(len(values))
                for j in range(i + 1, len(values))
            )
            if not ok:
                return None
        stubs = np.array(leftover, dtype=int)
    return edges


def _sample_regular_pairs(n, d, rng):
    """Edge set of a uniform-ish random d-regular simple graph on n vertices."""
    if d == 0:
        return set()
    if d == n - 1:
        return {(u, v) for u in range(n) for v in range(u + 1, n)}
    if d > (n - 1) // 2:
        # Dense regime: sample the complement instead.
        comp = _sample_regular_pairs(n, n - 1 - d, rng)
        return {
            (u, v)
            for u in range(n)
            for v in range(u + 1, n)
            if (u, v) not in comp
        }
    for _ in range(_MAX_RESTARTS):
        edges = _pairing_attempt(n, d, rng)
        if edges is not None:
            return edges
    raise RetryExhaustedError(
        f"pairing sampler failed after {_MAX_RESTARTS} restarts (n={n}, d={d})"
    )


def gen_d_regular_random(n, d, seed) -> BiasedGraph:
    """Random d-regular simple graph with all edge biases +1.

    Uses the configuration model with stub repair; for d > (n-1)/2 the
    complement graph is sampled instead.  Identical (n, d, seed) inputs
    reproduce the same edge set bit for bit.
    """
    if n <= 0:
        raise InfeasibleDegreeError("need at least one vertex")
    if d < 1 or d >= n:
        raise InfeasibleDegreeError(f"degree d={d} infeasible for n={n}")
    if (n * d) % 2 != 0:
        raise InfeasibleDegreeError(f"n*d = {n * d} must be even")
    rng = rng_from(seed, "d_regular", n, d)
    pairs = _sample_regular_pairs(n, d, rng)
    assert len(pairs) == n * d // 2
    return BiasedGraph.from_edges(n, pairs)


def gen_cycle(n) -> BiasedGraph:
    if n < 3:
        raise InfeasibleDegreeError("cycle needs n >= 3")
    return BiasedGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def gen_complete(n) -> BiasedGraph:
    if n < 1:
        raise InfeasibleDegreeError("need at least one vertex")
    return BiasedGraph.from_edges(
        n, [(u, v) for u in range(n) for v in range(u + 1, n)]
    )


def _bipartite_attempt(n, k, rng):
    """One bipartite pairing attempt with repair; pairs (i, j), both in 0..n-1."""
    pairs = set()
    left = np.repeat(np.arange(n), k)
    right = np.repeat(np.arange(n), k)
    rounds = 0
    while left.size:
        rounds += 1
        if rounds > _MAX_REPAIR_ROUNDS:
            return None
        rng.shuffle(left)
        rng.shuffle(right)
        next_left, next_right = [], []
        progressed = False
        for a, b in zip(left, right):
            pair = (int(a), int(b))
            if pair in pairs:
                next_left.append(pair[0])
                next_right.append(pair[1])
            else:
                pairs.add(pair)
                progressed = True
        if next_left and not progressed:
            ls, rs = sorted(set(next_left)), sorted(set(next_right))
            if not any((a, b) not in pairs for a in ls for b in rs):
                return None
        left = np.array(next_left, dtype=int)
        right = np.array(next_right, dtype=int)
    return pairs


def sample_biregular_pairs(n, k, rng):
    """Pairs (i, j) of a random k-regular bipartite graph on n+n vertices."""
    if k == 0:
        return set()
    if k == n:
        return {(i, j) for i in range(n) for j in range(n)}
    if k > n // 2:
        comp = sample_biregular_pairs(n, n - k, rng)
        return {(i, j) for i in range(n) for j in range(n) if (i, j) not in comp}
    for _ in range(_MAX_RESTARTS):
        pairs = _bipartite_attempt(n, k, rng)
        if pairs is not None:
            return pairs
    raise RetryExhaustedError(
        f"bipartite sampler failed after {_MAX_RESTARTS} restarts (n={n}, k={k})"
    )


def gen_bipartite_d_regular(n_per_side, d, seed) -> BiasedGraph:
    """Random bipartite d-regular graph; sides are 0..n-1 and n..2n-1."""
    if n_per_side <= 0:
        raise InfeasibleDegreeError("need at least one vertex per side")
    if d < 1 or d > n_per_side:
        raise InfeasibleDegreeError(
            f"degree d={d} infeasible for n_per_side={n_per_side}"
        )
    rng = rng_from(seed, "bipartite", n_per_side, d)
    pairs = sample_biregular_pairs(n_per_side, d, rng)
    edges = [(i, n_per_side + j) for i, j in pairs]
    return BiasedGraph.from_edges(2 * n_per_side, edges)


def two_lift(g: BiasedGraph, seed, force_parallel=False) -> BiasedGraph:
    """Random 2-lift: each edge lifts to a parallel or a crossing pair.

    Vertex u's mirror copy is u + n.  With force_parallel the lift is the
    disjoint double cover (a test hook).
    """
    n = g.n
    items = g.sorted_edges()
    if force_parallel:
        choices = np.zeros(len(items), dtype=int)
    else:
        rng = rng_from(seed, "two_lift", n, g.num_edges)
        choices = rng.integers(0, 2, size=len(items))
    edges = []
    for (u, v, bias), crossing in zip(items, choices):
        if crossing:
            edges.append((u, v + n, bias))
            # A[u', v] keeps the original u->v orientation, so the stored
            # (v, u') entry is the conjugate.
            edges.append((v, u + n, bias.conjugate()))
        else:
            edges.append((u, v, bias))
            edges.append((u + n, v + n, bias))
    diagonal = np.concatenate([g.diagonal, g.diagonal])
    labels = None
    if g.labels is not None:
        labels = {
            name: list(verts) + [v + n for v in verts]
            for name, verts in g.labels.items()
        }
    return BiasedGraph.from_edges(2 * n, edges, diagonal=diagonal, labels=labels)


# ----------------------------------------------------------------------
# Mutations
# ----------------------------------------------------------------------


def delete_random_edges(g: BiasedGraph, fraction, seed) -> BiasedGraph:
    """Remove round(fraction * m) edges uniformly without replacement."""
    if not 0.0 <= fraction <= 1.0:
        raise QllabError(f"fraction {fraction} outside [0, 1]")
    m = g.num_edges
    k = int(round(fraction * m))
    if k == 0:
        return g.replace_edges(g.edges)
    rng = rng_from(seed, "delete", g.n, m, k)
    keys = sorted(g.edges)
    doomed = {keys[i] for i in rng.choice(m, size=k, replace=False)}
    kept = {key: bias for key, bias in g.edges.items() if key not in doomed}
    return g.replace_edges(kept)


def add_diagonal_disorder(g: BiasedGraph, sigma, seed) -> BiasedGraph:
    """Add independent normal(0, sigma^2) draws to the diagonal."""
    if sigma < 0:
        raise QllabError("sigma must be nonnegative")
    rng = rng_from(seed, "disorder", g.n)
    draws = rng.normal(0.0, sigma, size=g.n) if sigma > 0 else np.zeros(g.n)
    out = g.replace_edges(g.edges)
    out.diagonal = g.diagonal + draws
    return out


def average_degree(g: BiasedGraph) -> float:
    """2m/n; bias magnitudes ignored."""
    if g.n == 0:
        return 0.0
    return 2.0 * g.num_edges / g.n


def disjoint_union(g: BiasedGraph, h: BiasedGraph) -> BiasedGraph:
    """Side-by-side union; h's vertices are shifted by g.n."""
    edges = list(g.sorted_edges())
    edges += [(u + g.n, v + g.n, b) for u, v, b in h.sorted_edges()]
    diagonal = np.concatenate([g.diagonal, h.diagonal])
    labels = None
    if g.labels is not None and h.labels is not None:
        overlap = set(g.labels) & set(h.labels)
        if overlap:
            raise QllabError(f"label collision in union: {sorted(overlap)}")
        labels = {name: list(verts) for name, verts in g.labels.items()}
        labels.update(
            {name: [v + g.n for v in verts] for name, verts in h.labels.items()}
        )
    return BiasedGraph.from_edges(g.n + h.n, edges, diagonal=diagonal, labels=labels)


def connected_components(g: BiasedGraph) -> list:
    """Vertex sets of the connected components (sorted lists)."""
    adj = [[] for _ in range(g.n)]
    for u, v in g.edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * g.n
    comps = []
    for start in range(g.n):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


# ----------------------------------------------------------------------
# Serialization
# ----------------------------------------------------------------------


def graph_to_json(g: BiasedGraph) -> dict:
    doc = {
        "n": g.n,
        "edges": [[u, v, b.real, b.imag] for u, v, b in g.sorted_edges()],
        "diagonal": list(g.diagonal),
    }
    if g.labels is not None:
        doc["labels"] = {name: list(verts) for name, verts in g.labels.items()}
    return doc


def graph_from_json(doc: dict) -> BiasedGraph:
    edges = [(int(u), int(v), complex(re, im)) for u, v, re, im in doc["edges"]]
    return BiasedGraph.from_edges(
        int(doc["n"]),
        edges,
        diagonal=np.asarray(doc.get("diagonal"), dtype=float)
        if doc.get("diagonal") is not None
        else None,
        labels=doc.get("labels"),
    )


def save_graph(g: BiasedGraph, path):
    with open(path, "w") as fh:
        json.dump(graph_to_json(g), fh, indent=1)
        fh.write("\n")


def load_graph(path) -> BiasedGraph:
    with open(path) as fh:
        return graph_from_json(json.load(fh))
