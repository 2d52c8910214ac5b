"""Kuramoto phase dynamics on biased graphs.

The coupling matrix is the magnitude of the adjacency (phases of complex
biases enter only through the phase transform), and the coupling term is
attractive: theta_dot_i = eps_i + (K/N) sum_j |a_ij| sin(theta_j - theta_i),
so equal phases are a stable fixed point and the network synchronizes.

`phase_transform` conjugates the adjacency by the diagonal phase unitary,
multiplying each edge bias by exp(i (theta_j - theta_i)); the spectrum is
untouched while the eigenbasis rotates with the oscillators.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NumericalError, QllabError
from .graph import BiasedGraph, derive_seed, rng_from
from .qlproduct import (
    ProductSpec,
    build_product,
    product_basis_labels,
    project_product_state,
)
from .spectral import eigendecompose


@dataclass
class OscillatorState:
    """Phases, mean-removed frequency offsets, and current time."""

    theta: np.ndarray
    epsilon: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.epsilon = np.asarray(self.epsilon, dtype=float)
        if self.theta.shape != self.epsilon.shape:
            raise QllabError("theta and epsilon must have matching shapes")
        if self.epsilon.size and abs(self.epsilon.mean()) > 1e-12:
            raise QllabError("epsilon must be mean-free (rotating frame)")

    def theta_wrapped(self) -> np.ndarray:
        return np.mod(self.theta, 2.0 * np.pi)


def coupling_matrix(g: BiasedGraph) -> np.ndarray:
    """|a_ij| with zero diagonal; the real Kuramoto coupling weights."""
    m = np.abs(g.adjacency())
    np.fill_diagonal(m, 0.0)
    return m


def _rhs(theta, epsilon, m, k_over_n):
    s, c = np.sin(theta), np.cos(theta)
    # sum_j m_ij sin(theta_j - theta_i) = cos_i (M sin)_i - sin_i (M cos)_i
    return epsilon + k_over_n * (c * (m @ s) - s * (m @ c))


def _advance(theta, epsilon, m, k_over_n, dt, integrator):
    k1 = _rhs(theta, epsilon, m, k_over_n)
    if np.abs(k1).max() * dt > np.pi:
        raise NumericalError(
            "integrator unstable: |theta_dot| * dt exceeds pi; reduce dt"
        )
    if integrator == "euler":
        return theta + dt * k1
    if integrator == "rk4":
        k2 = _rhs(theta + 0.5 * dt * k1, epsilon, m, k_over_n)
        k3 = _rhs(theta + 0.5 * dt * k2, epsilon, m, k_over_n)
        k4 = _rhs(theta + dt * k3, epsilon, m, k_over_n)
        return theta + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    raise QllabError(f"unknown integrator {integrator!r}")


def step(state: OscillatorState, g: BiasedGraph, K, dt, integrator="rk4") -> OscillatorState:
    """Advance the phases by one time step."""
    if dt <= 0:
        raise QllabError("dt must be positive")
    m = coupling_matrix(g)
    theta = _advance(state.theta, state.epsilon, m, K / g.n, dt, integrator)
    return OscillatorState(theta=theta, epsilon=state.epsilon, t=state.t + dt)


def order_parameter(theta) -> float:
    """|mean(exp(i theta))|: 1 when fully synchronized."""
    theta = np.asarray(theta, dtype=float)
    if theta.size == 0:
        raise QllabError("no oscillators")
    return float(abs(np.exp(1j * theta).mean()))


def phase_transform(g: BiasedGraph, state: OscillatorState) -> BiasedGraph:
    """Conjugate the adjacency by diag(exp(i theta)).

    Each stored edge bias a_uv becomes a_uv * exp(i (theta_v - theta_u));
    the spectrum is preserved exactly.
    """
    theta = state.theta
    if len(theta) != g.n:
        raise QllabError("state size does not match graph")
    edges = {
        (u, v): bias * np.exp(1j * (theta[v] - theta[u]))
        for (u, v), bias in g.edges.items()
    }
    return g.replace_edges(edges)


@dataclass
class SyncRunConfig:
    """Parameters of one synchronization experiment.

    graph may be a built BiasedGraph (shared by all realizations) or a
    ProductSpec (a fresh graph is drawn per realization).  dt defaults to
    1e-3 * N / K; sigma_eps defaults to 0.1 * K / N.
    """

    graph: object
    K: float
    t_end: float
    dt: float = None
    integrator: str = "rk4"
    init: str = "uniform_phases"
    init_width: float = 2.0 * np.pi
    sigma_eps: float = None
    realizations: int = 1
    seed: int = 0
    record_every: int = 10
    effective_purity: bool = False

    def __post_init__(self):
        if self.K < 0:
            raise QllabError("coupling K must be nonnegative")
        if self.dt is not None and self.dt <= 0:
            raise QllabError("dt must be positive")
        if self.t_end <= 0:
            raise QllabError("t_end must be positive")
        if self.init not in ("uniform_phases", "normal"):
            raise QllabError(f"unknown init {self.init!r}")
        if self.realizations < 1:
            raise QllabError("need at least one realization")


@dataclass
class SyncResult:
    """Recorded time series, ensemble-averaged over realizations."""

    t: np.ndarray
    order_parameter: np.ndarray
    purity: np.ndarray
    eigenvalue_top: np.ndarray
    spectrum_drift: float
    config: SyncRunConfig = field(repr=False, default=None)


def initial_state(n, cfg: SyncRunConfig, rng) -> OscillatorState:
    if cfg.init == "uniform_phases":
        theta = rng.uniform(0.0, cfg.init_width, size=n)
    else:
        theta = rng.normal(0.0, cfg.init_width, size=n)
    sigma = cfg.sigma_eps
    if sigma is None:
        sigma = 0.1 * cfg.K / n
    eps = rng.normal(0.0, sigma, size=n) if sigma > 0 else np.zeros(n)
    eps -= eps.mean()
    return OscillatorState(theta=theta, epsilon=eps, t=0.0)


def _realization_graph(cfg: SyncRunConfig, r: int) -> BiasedGraph:
    g = cfg.graph
    if isinstance(g, BiasedGraph):
        return g
    if isinstance(g, ProductSpec):
        bits = tuple(
            replace(b, seed=derive_seed(cfg.seed, "bit", r, j))
            for j, b in enumerate(g.qlbits)
        )
        spec = replace(g, qlbits=bits, seed=derive_seed(cfg.seed, "graph", r))
        return build_product(spec)
    raise QllabError("graph must be a BiasedGraph or a ProductSpec")


def run_sync_experiment(cfg: SyncRunConfig) -> SyncResult:
    """Integrate the ensemble and record order parameter and emergent purity.

    At every recorded step the adjacency is phase-transformed by the current
    oscillator phases and diagonalized; the top eigenvector's density matrix
    is averaged across realizations (a convex sum), and its purity tracks how
    mixed the emergent state is.  Spectrum drift under the transform is
    monitored and returned.
    """
    sample = _realization_graph(cfg, 0)
    n = sample.n
    dt = cfg.dt if cfg.dt is not None else 1e-3 * n / max(cfg.K, 1e-12)
    steps = max(1, int(round(cfg.t_end / dt)))
    record_at = list(range(0, steps + 1, cfg.record_every))
    if record_at[-1] != steps:
        record_at.append(steps)
    times = np.array([k * dt for k in record_at])

    nrec = len(record_at)
    if cfg.effective_purity:
        dim = len(product_basis_labels(sample))
    else:
        dim = n
    rho = np.zeros((nrec, dim, dim), dtype=complex)
    r_sum = np.zeros(nrec)
    top_sum = np.zeros(nrec)
    drift = 0.0

    for r in range(cfg.realizations):
        g = _realization_graph(cfg, r)
        m = coupling_matrix(g)
        reference = eigendecompose(g).eigenvalues
        state = initial_state(n, cfg, rng_from(cfg.seed, "init", r))
        k_over_n = cfg.K / n
        rec_idx = 0
        for k in range(steps + 1):
            if rec_idx < nrec and k == record_at[rec_idx]:
                transformed = phase_transform(g, state)
                spec = eigendecompose(transformed)
                drift = max(
                    drift, float(np.abs(spec.eigenvalues - reference).max())
                )
                w = spec.eigenvectors[:, 0].astype(complex)
                if cfg.effective_purity:
                    w = project_product_state(g, w).normalized()
                rho[rec_idx] += np.outer(w, w.conj())
                r_sum[rec_idx] += order_parameter(state.theta)
                top_sum[rec_idx] += spec.eigenvalues[0]
                rec_idx += 1
            if k < steps:
                theta = _advance(
                    state.theta, state.epsilon, m, k_over_n, dt, cfg.integrator
                )
                state = OscillatorState(
                    theta=theta, epsilon=state.epsilon, t=state.t + dt
                )

    rho /= cfg.realizations
    purity = np.array([float(np.trace(p @ p).real) for p in rho])
    return SyncResult(
        t=times,
        order_parameter=r_sum / cfg.realizations,
        purity=purity,
        eigenvalue_top=top_sum / cfg.realizations,
        spectrum_drift=drift,
        config=cfg,
    )
