import itertools
import math

import numpy as np
import pytest

from qllab.errors import DegeneracyError, QllabError, TooLargeError
from qllab.graph import rng_from
from qllab.qlbit import CrossRegular, qlbit_spec
from qllab.qlproduct import ProductSpec, build_contracted_product
from qllab.spectral import eigendecompose
from qllab.states import (
    DensityMatrix,
    alternator,
    bell_states,
    concurrence,
    convex_sum,
    degenerate_mixture,
    density_from_state,
    permutation_operator,
    purity,
    state_fidelity,
    subspace_fidelity,
    symmetrizer,
    tensor_inner,
)

EXPECTED_MIXTURE = 0.25 * np.array(
    [
        [1, 0, 0, 1],
        [0, 1, 1, 0],
        [0, 1, 1, 0],
        [1, 0, 0, 1],
    ],
    dtype=complex,
)


def random_state(rng, dim):
    c = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return c / np.linalg.norm(c)


def random_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestDensityMatrix:
    def test_pure_state_basics(self):
        rho = density_from_state([1.0, 0.0])
        assert np.allclose(rho.matrix, np.diag([1.0, 0.0]))
        assert purity(rho) == pytest.approx(1.0)

    def test_bell_density_corners(self):
        rho = density_from_state(bell_states()["phi_plus"])
        assert rho.matrix[0, 0] == pytest.approx(0.5)
        assert rho.matrix[0, 3] == pytest.approx(0.5)
        assert rho.matrix[1, 1] == pytest.approx(0.0)

    def test_rank_one(self):
        rng = rng_from(1)
        for _ in range(5):
            rho = density_from_state(random_state(rng, 6))
            evals = np.sort(np.linalg.eigvalsh(rho.matrix))
            assert evals[-1] == pytest.approx(1.0, abs=1e-10)
            assert np.abs(evals[:-1]).max() <= 1e-10

    def test_validation(self):
        with pytest.raises(QllabError):
            density_from_state([1.0, 1.0])  # not normalized
        with pytest.raises(QllabError):
            DensityMatrix(np.diag([0.7, 0.7]))  # trace 1.4
        with pytest.raises(QllabError):
            DensityMatrix(np.array([[0.5, 1.0], [0.0, 0.5]]))  # not Hermitian
        with pytest.raises(QllabError):
            DensityMatrix(np.diag([1.5, -0.5]))  # negative eigenvalue


class TestConvexSum:
    def test_single_element_identity(self):
        rho = density_from_state([0.6, 0.8])
        out = convex_sum([rho], [1.0])
        assert np.allclose(out.matrix, rho.matrix)

    def test_equal_mixture_of_basis_states(self):
        out = convex_sum(
            [density_from_state([1, 0]), density_from_state([0, 1])], [0.5, 0.5]
        )
        assert np.allclose(out.matrix, np.eye(2) / 2)
        assert purity(out) == pytest.approx(0.5)

    def test_bell_mixture_matches_expected_matrix(self):
        bells = bell_states()
        out = convex_sum(
            [
                density_from_state(bells["phi_plus"]),
                density_from_state(bells["psi_plus"]),
            ],
            [0.5, 0.5],
        )
        assert np.abs(out.matrix - EXPECTED_MIXTURE).max() <= 1e-12

    def test_weight_validation(self):
        rho = density_from_state([1, 0])
        with pytest.raises(QllabError):
            convex_sum([rho, rho], [0.7, 0.7])
        with pytest.raises(QllabError):
            convex_sum([rho], [-1.0])

    def test_purity_never_exceeds_components(self):
        rng = rng_from(5)
        for _ in range(10):
            rhos = [density_from_state(random_state(rng, 4)) for _ in range(3)]
            w = rng.random(3)
            w /= w.sum()
            mixed = convex_sum(rhos, w)
            assert purity(mixed) <= max(purity(r) for r in rhos) + 1e-12


class TestPurityAndConcurrence:
    def test_maximally_mixed(self):
        assert purity(DensityMatrix(np.eye(4) / 4)) == pytest.approx(0.25)

    def test_expected_mixture_purity(self):
        rho = DensityMatrix(EXPECTED_MIXTURE)
        # oracle: direct trace of the squared matrix
        assert purity(rho) == pytest.approx(
            float(np.trace(EXPECTED_MIXTURE @ EXPECTED_MIXTURE).real)
        )
        assert purity(rho) == pytest.approx(0.5)

    def test_bell_state_concurrence_one(self):
        rho = density_from_state(bell_states()["phi_plus"])
        assert abs(concurrence(rho) - 1.0) <= 1e-9

    def test_expected_mixture_concurrence_zero(self):
        assert concurrence(DensityMatrix(EXPECTED_MIXTURE)) == 0.0

    def test_product_states_are_separable(self):
        rng = rng_from(9)
        for _ in range(5):
            a = random_state(rng, 2)
            b = random_state(rng, 2)
            rho = density_from_state(np.kron(b, a))
            assert concurrence(rho) <= 1e-10

    def test_pure_state_formula_oracle(self):
        # for pure two-qubit states concurrence = 2 |c1 c4 - c2 c3|
        rng = rng_from(11)
        for _ in range(10):
            c = random_state(rng, 4)
            expected = 2 * abs(c[0] * c[3] - c[1] * c[2])
            got = concurrence(density_from_state(c))
            assert got == pytest.approx(expected, abs=1e-9)

    def test_local_unitary_invariance(self):
        rng = rng_from(13)
        c = random_state(rng, 4)
        rho = density_from_state(c)
        base = concurrence(rho)
        for _ in range(8):
            u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
            rotated = DensityMatrix(u @ rho.matrix @ u.T.conj())
            assert concurrence(rotated) == pytest.approx(base, abs=1e-8)

    def test_dimension_guard(self):
        with pytest.raises(QllabError):
            concurrence(DensityMatrix(np.eye(2) / 2))


class TestBellStates:
    def test_vectors(self):
        bells = bell_states()
        s = 1 / math.sqrt(2)
        assert np.allclose(bells["phi_plus"], [s, 0, 0, s])
        assert np.allclose(bells["phi_minus"], [s, 0, 0, -s])
        assert np.allclose(bells["psi_plus"], [0, s, s, 0])
        # psi_minus = |a1>|b2> - |a2>|b1>, a global sign away from (0,1,-1,0)
        assert state_fidelity(bells["psi_minus"], [0, 1, -1, 0]) == pytest.approx(1.0)

    def test_orthonormal(self):
        m = np.column_stack(list(bell_states().values()))
        assert np.abs(m.T.conj() @ m - np.eye(4)).max() <= 1e-12


class TestDegenerateMixture:
    def _product(self, bias_b=-1.0, kc_b=2):
        bit_a = qlbit_spec(32, 12, policy=CrossRegular(2), connect_bias=1.0, seed=11)
        bit_b = qlbit_spec(32, 12, policy=CrossRegular(kc_b), connect_bias=bias_b, seed=22)
        spec = ProductSpec(qlbits=(bit_a, bit_b), mode="contracted", n=32, d=12, seed=7)
        return build_contracted_product(spec)

    def test_mixture_matches_expected_matrix(self):
        g = self._product()
        spectrum = eigendecompose(g)
        rho = degenerate_mixture(g, spectrum)
        assert np.abs(rho.matrix - EXPECTED_MIXTURE).max() <= 0.05
        assert purity(rho) == pytest.approx(0.5, abs=0.02)
        assert concurrence(rho) <= 1e-6

    def test_decomposition_into_bell_pair(self):
        g = self._product()
        rho = degenerate_mixture(g, eigendecompose(g))
        bells = bell_states()
        recon = 0.5 * np.outer(bells["phi_plus"], bells["phi_plus"].conj())
        recon += 0.5 * np.outer(bells["psi_plus"], bells["psi_plus"].conj())
        assert np.abs(rho.matrix - recon).max() <= 0.05

    def test_no_degeneracy_error(self):
        g = self._product(bias_b=1.0, kc_b=4)  # eigenvalues d+2k', d+2k-..., all split
        spectrum = eigendecompose(g)
        with pytest.raises(DegeneracyError):
            degenerate_mixture(g, spectrum)


class TestTensorInner:
    def test_orthogonal_factors(self):
        assert tensor_inner([1, 0], [1, 0], [0, 1], [1, 0]) == 0

    def test_unit_vectors(self):
        assert tensor_inner([1, 0], [0, 1], [1, 0], [0, 1]) == 1

    def test_distance_identity(self):
        # ||u x x - v x y||^2 = 2 - 2 Re <u,v><x,y> for unit vectors
        rng = rng_from(21)
        for _ in range(10):
            u, v = random_state(rng, 3), random_state(rng, 3)
            x, y = random_state(rng, 4), random_state(rng, 4)
            lhs = np.linalg.norm(np.kron(u, x) - np.kron(v, y)) ** 2
            rhs = 2 - 2 * (tensor_inner(u, x, v, y)).real
            assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_dimension_guard(self):
        with pytest.raises(QllabError):
            tensor_inner([1, 0], [1], [1, 0, 0], [1])


class TestPermutationOperators:
    def test_matrices_are_permutations(self):
        p = permutation_operator((1, 2, 0))
        assert p.shape == (8, 8)
        assert np.array_equal(p @ p.T, np.eye(8))
        assert set(np.unique(p)) == {0.0, 1.0}

    def test_composition_law(self):
        rng = rng_from(31)
        for _ in range(50):
            n = int(rng.integers(2, 6))
            sigma = tuple(rng.permutation(n))
            tau = tuple(rng.permutation(n))
            composed = tuple(sigma[tau[i]] for i in range(n))
            lhs = permutation_operator(sigma) @ permutation_operator(tau)
            rhs = permutation_operator(composed)
            assert np.array_equal(lhs, rhs)

    def test_swap_action_on_basis(self):
        # |12>: factor 1 in level 1, factor 2 in level 2 -> index 2
        swap = permutation_operator((1, 0))
        e12 = np.zeros(4)
        e12[2] = 1.0
        out = swap @ e12
        assert out[1] == 1.0  # |21>

    def test_invalid_permutation(self):
        with pytest.raises(QllabError):
            permutation_operator((0, 0))


class TestSymmetrizerAlternator:
    def test_two_factor_actions(self):
        s2, a2 = symmetrizer(2), alternator(2)
        e12 = np.zeros(4)
        e12[2] = 1.0
        e21 = np.zeros(4)
        e21[1] = 1.0
        assert np.allclose(s2 @ e12, 0.5 * (e12 + e21))
        assert np.allclose(a2 @ e12, 0.5 * (e12 - e21))

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
    def test_idempotent(self, n):
        s, a = symmetrizer(n), alternator(n)
        assert np.abs(s @ s - s).max() <= 1e-12
        assert np.abs(a @ a - a).max() <= 1e-12

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_mutually_annihilating(self, n):
        # n = 1 is excluded: there S and A are both the identity
        s, a = symmetrizer(n), alternator(n)
        assert np.abs(s @ a).max() <= 1e-12
        assert np.abs(a @ s).max() <= 1e-12

    @pytest.mark.parametrize("n,rank", [(2, 1), (3, 0), (4, 0)])
    def test_alternator_rank_over_two_level_space(self, n, rank):
        a = alternator(n)
        evals = np.linalg.eigvalsh(a)
        assert int((evals > 0.5).sum()) == rank

    def test_symmetric_subspace_dimension(self):
        # dim S^n(V) = n + 1 for dim V = 2
        for n in (2, 3, 4):
            s = symmetrizer(n)
            evals = np.linalg.eigvalsh(s)
            assert int((evals > 0.5).sum()) == n + 1

    def test_basis_count_by_level_occupation(self):
        from qllab.qlproduct import bit_values

        for n in (2, 3, 5):
            by_p = {}
            for k in range(2**n):
                p = sum(v == 2 for v in bit_values(k, n))
                by_p[p] = by_p.get(p, 0) + 1
            assert by_p == {p: math.comb(n, p) for p in range(n + 1)}
            assert sum(by_p.values()) == 2**n

    def test_size_guard(self):
        with pytest.raises(TooLargeError):
            symmetrizer(9)


class TestFidelityHelpers:
    def test_state_fidelity_phase_blind(self):
        v = np.array([1.0, 1j]) / np.sqrt(2)
        assert state_fidelity(v, np.exp(1j * 0.7) * v) == pytest.approx(1.0)

    def test_subspace_fidelity(self):
        basis = [np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])]
        inside = np.array([1.0, 1.0, 0.0])
        outside = np.array([0.0, 0.0, 1.0])
        assert subspace_fidelity(basis, inside) == pytest.approx(1.0)
        assert subspace_fidelity(basis, outside) == pytest.approx(0.0, abs=1e-12)
