"""Witness QL bits: spatially separable read-out ports for product graphs.

A witness is a fresh copy of one constituent QL bit, prepared with known
(all-positive) biases so its own emergent state is |x1> + |x2>.  Its x1
block couples only to product blocks whose target-bit value is 1, and x2
only to value-2 blocks.  After coupling, the relative sign of the witness
block amplitudes inside the emergent state of the combined graph reveals
whether the target bit's phase matches the witness ('same') or is opposite
('inverted').
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AmbiguousReadoutError, MissingLabelsError, QllabError
from .graph import BiasedGraph, derive_seed, disjoint_union, rng_from
from .qlbit import build_qlbit
from .qlproduct import ProductSpec, parse_block_label
from .spectral import eigendecompose, emergent_state

READOUT_THRESHOLD = 0.05

WITNESS_BLOCKS = ("x1", "x2")


@dataclass
class WitnessAttachment:
    """Bookkeeping for one attached witness.

    edge_groups maps (witness_block, product_block) to the list of edges
    added between them; x1 only ever pairs with value-1 blocks of the
    target bit and x2 with value-2 blocks.
    """

    target: int
    strength: float
    density: float
    edge_groups: dict = field(default_factory=dict)


def attach_witness(
    product: BiasedGraph,
    spec: ProductSpec,
    bit_index: int,
    strength: float,
    density: float = 0.1,
    seed: int = 0,
):
    """Couple a fresh witness QL bit to the like-labeled product blocks.

    Each witness block gains round(density * n_block) random edges of real
    magnitude `strength` to every product block whose target-bit value
    matches.  Returns (combined graph, WitnessAttachment).
    """
    if product.labels is None:
        raise MissingLabelsError("product graph has no block labels")
    if not 0 <= bit_index < spec.q:
        raise IndexError(f"bit index {bit_index} out of range for q={spec.q}")
    if strength < 0:
        raise QllabError("coupling strength must be nonnegative")

    bit = spec.qlbits[bit_index]
    witness_bit = replace(
        bit,
        connect_bias=1.0 + 0.0j,
        red_bias=1.0,
        blue_bias=1.0,
        seed=derive_seed(seed, "witness"),
    )
    witness = build_qlbit(witness_bit, block_names=WITNESS_BLOCKS)
    combined = disjoint_union(product, witness)

    attachment = WitnessAttachment(
        target=bit_index, strength=strength, density=density
    )
    if strength == 0:
        return combined, attachment

    offset = product.n
    new_edges = list(combined.sorted_edges())
    for side, wname in enumerate(WITNESS_BLOCKS, start=1):
        wverts = [v + offset for v in witness.labels[wname]]
        for pname, pverts in product.labels.items():
            _, values = parse_block_label(pname)
            if values[bit_index] != side:
                continue
            n_block = len(pverts)
            count = int(round(density * n_block))
            count = min(count, len(wverts) * n_block)
            if count == 0:
                continue
            rng = rng_from(seed, "attach", wname, pname)
            picks = rng.choice(len(wverts) * n_block, size=count, replace=False)
            group = []
            for t in sorted(int(p) for p in picks):
                wi, pj = divmod(t, n_block)
                edge = (pverts[pj], wverts[wi], strength)
                new_edges.append(edge)
                group.append(edge)
            attachment.edge_groups[(wname, pname)] = group

    labels = {name: list(v) for name, v in combined.labels.items()}
    out = BiasedGraph.from_edges(
        combined.n, new_edges, diagonal=combined.diagonal, labels=labels
    )
    return out, attachment


def witness_block_projections(combined: BiasedGraph, w):
    """Amplitudes of a vector on the witness block indicators (x1, x2)."""
    if combined.labels is None or any(
        name not in combined.labels for name in WITNESS_BLOCKS
    ):
        raise MissingLabelsError("no witness blocks attached")
    out = []
    for name in WITNESS_BLOCKS:
        verts = list(combined.labels[name])
        j = np.zeros(combined.n)
        j[verts] = 1.0 / np.sqrt(len(verts))
        out.append(complex(np.vdot(j, np.asarray(w))))
    return tuple(out)


def witness_readout(combined: BiasedGraph, known_phase: str = "plus") -> str:
    """Read the target bit's phase off the witness blocks.

    Diagonalizes the combined graph, projects the emergent (top) state onto
    the witness indicators, and reports 'same' when the two witness block
    amplitudes align in phase, 'inverted' otherwise.  The comparison uses
    Re(conj(a1) * a2), which is global-phase free and reduces to the sign
    product of the real parts for real states.
    """
    if known_phase not in ("plus", "minus"):
        raise QllabError(f"unknown witness phase {known_phase!r}")
    spectrum = eigendecompose(combined)
    top = emergent_state(spectrum, policy="highest")
    a1, a2 = witness_block_projections(combined, top.eigenvector)
    if abs(a1) < READOUT_THRESHOLD and abs(a2) < READOUT_THRESHOLD:
        raise AmbiguousReadoutError(
            f"witness projections {abs(a1):.3g}, {abs(a2):.3g} below "
            f"{READOUT_THRESHOLD}"
        )
    aligned = (a1.conjugate() * a2).real > 0
    if known_phase == "minus":
        aligned = not aligned
    return "same" if aligned else "inverted"
