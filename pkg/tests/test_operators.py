import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cqwitness.errors import DimensionError, InvalidStateError, NotHermitianError
from cqwitness.operators import (
    DensityState,
    PauliString,
    eigendecompose_hermitian,
    expectation,
    fidelity,
    is_hermitian,
    is_unitary,
    kron,
    kron_all,
    partial_trace,
    pauli_matrix,
    projector,
    random_density,
    random_unitary,
    trace_distance,
)

I2 = np.eye(2)
PHI_PLUS = projector(np.array([1, 0, 0, 1]))


class TestPauli:
    def test_z_is_diag(self):
        np.testing.assert_array_equal(pauli_matrix("Z"), np.diag([1, -1]))

    def test_x_squared_is_identity(self):
        x = pauli_matrix("X")
        np.testing.assert_array_equal(x @ x, I2)

    @pytest.mark.parametrize("label", "XYZ")
    def test_traceless_hermitian_unitary(self, label):
        m = pauli_matrix(label)
        assert np.trace(m) == 0
        assert is_hermitian(m) and is_unitary(m)

    def test_unknown_label(self):
        with pytest.raises(ValueError):
            pauli_matrix("W")

    def test_returned_matrix_is_a_copy(self):
        m = pauli_matrix("X")
        m[0, 0] = 5
        assert pauli_matrix("X")[0, 0] == 0

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_pauli_basis_orthogonality(self, n):
        strings = [PauliString(f) for f in itertools.product("IXYZ", repeat=n)]
        dim = 2**n
        for p, q in itertools.product(strings, repeat=2):
            overlap = np.trace(p.matrix() @ q.matrix())
            assert overlap == pytest.approx(dim if p == q else 0)

    def test_pauli_string_materialisation(self):
        p = PauliString.parse("XIZ")
        m = p.matrix()
        assert m.shape == (8, 8)
        assert is_hermitian(m) and is_unitary(m)
        assert abs(np.trace(m)) == 0
        assert PauliString.parse("II").is_identity()
        assert np.trace(PauliString.parse("II").matrix()) == 4

    @pytest.mark.parametrize("bad", ["", "XXXX", "XA"])
    def test_pauli_string_validation(self, bad):
        with pytest.raises(ValueError):
            PauliString.parse(bad)


class TestKron:
    def test_identity(self):
        np.testing.assert_array_equal(kron(I2, I2), np.eye(4))

    def test_zz_eigenvalue_on_00(self):
        zz = kron(pauli_matrix("Z"), pauli_matrix("Z"))
        v = np.array([1, 0, 0, 0])
        np.testing.assert_array_equal(zz @ v, v)

    def test_mixed_product(self):
        x = pauli_matrix("X")
        np.testing.assert_array_equal(kron(x, I2) @ kron(I2, x), kron(x, x))

    def test_overflow(self):
        with pytest.raises(DimensionError):
            kron(np.eye(4), np.eye(4))
        with pytest.raises(DimensionError):
            kron_all(I2, I2, I2, I2)


class TestExpectation:
    def test_maximally_mixed(self):
        assert expectation(np.eye(4) / 4, "ZZ") == 0

    def test_eigenstate(self):
        assert expectation(projector("00"), "ZZ") == 1

    def test_bell_xz_zero(self):
        # Oracle: explicit 4x4 trace with hand-written matrices.
        xz = np.array([[0, 0, 1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, -1, 0, 0]])
        oracle = np.trace(PHI_PLUS @ xz).real
        assert oracle == 0
        assert expectation(PHI_PLUS, "XZ") == pytest.approx(oracle, abs=1e-15)

    def test_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            expectation(np.eye(2) / 2, np.array([[0, 1], [0, 0]]))

    def test_dim_mismatch(self):
        with pytest.raises(DimensionError):
            expectation(np.eye(2) / 2, "ZZ")

    def test_linearity(self, rng):
        for _ in range(20):
            a, b = random_density(4, rng), random_density(4, rng)
            w = rng.uniform()
            o1, o2 = PauliString.parse("XZ").matrix(), PauliString.parse("YI").matrix()
            mix = w * a.matrix + (1 - w) * b.matrix
            assert expectation(mix, o1) == pytest.approx(w * expectation(a, o1) + (1 - w) * expectation(b, o1), abs=1e-10)
            assert expectation(a, 0.3 * o1 + o2) == pytest.approx(0.3 * expectation(a, o1) + expectation(a, o2), abs=1e-10)


class TestPartialTrace:
    def test_product_state(self):
        rho = kron(projector("0"), projector("+"))
        np.testing.assert_allclose(partial_trace(rho, [0]).matrix, projector("0"), atol=1e-15)
        np.testing.assert_allclose(partial_trace(rho, [1]).matrix, projector("+"), atol=1e-15)

    def test_bell_marginal(self):
        np.testing.assert_allclose(partial_trace(PHI_PLUS, [0]).matrix, I2 / 2, atol=1e-15)

    def test_three_factor_marginals(self, rng):
        a, b, c = (random_density(2, rng).matrix for _ in range(3))
        rho = kron_all(a, b, c)
        np.testing.assert_allclose(partial_trace(rho, [1]).matrix, b, atol=1e-12)
        np.testing.assert_allclose(partial_trace(rho, [0, 2]).matrix, kron(a, c), atol=1e-12)

    def test_trace_preserved(self, rng):
        for dim in (4, 8):
            rho = random_density(dim, rng)
            n = int(math.log2(dim))
            for k in range(n):
                assert np.trace(partial_trace(rho, [k]).matrix).real == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("keep", [[], [2], [-1]])
    def test_invalid_index_set(self, keep):
        with pytest.raises(ValueError):
            partial_trace(PHI_PLUS, keep)


class TestDistances:
    def test_identity(self, rng):
        rho = random_density(4, rng)
        assert trace_distance(rho, rho) == pytest.approx(0, abs=1e-12)

    def test_orthogonal(self):
        assert trace_distance(projector("0"), projector("1")) == pytest.approx(1)

    def test_zero_plus(self):
        # Oracle: eigenvalues of the difference from numpy.
        oracle = 0.5 * np.abs(np.linalg.eigvalsh(projector("0") - projector("+"))).sum()
        assert oracle == pytest.approx(1 / math.sqrt(2))
        assert trace_distance(projector("0"), projector("+")) == pytest.approx(oracle, abs=1e-12)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionError):
            trace_distance(projector("0"), projector("00"))

    def test_triangle_and_unitary_invariance(self, rng):
        for _ in range(30):
            a, b, c = (random_density(4, rng) for _ in range(3))
            assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-9
            u = random_unitary(4, rng)
            rot = lambda r: u @ r.matrix @ u.conj().T  # noqa: E731
            assert trace_distance(rot(a), rot(b)) == pytest.approx(trace_distance(a, b), abs=1e-9)

    def test_fidelity_pure_states(self):
        assert fidelity(projector("+"), projector("-")) == pytest.approx(0, abs=1e-12)
        assert fidelity(projector("+"), projector("0")) == pytest.approx(0.5)
        assert fidelity(projector("+"), projector("+")) == pytest.approx(1)

    def test_fidelity_matches_pure_overlap(self, rng):
        for _ in range(10):
            v, w = (rng.standard_normal(2) + 1j * rng.standard_normal(2) for _ in range(2))
            v, w = v / np.linalg.norm(v), w / np.linalg.norm(w)
            assert fidelity(projector(v), projector(w)) == pytest.approx(abs(np.vdot(v, w)) ** 2, abs=1e-9)


class TestEigendecomposition:
    def test_z(self):
        evals, _ = eigendecompose_hermitian(pauli_matrix("Z"))
        np.testing.assert_allclose(evals, [-1, 1])

    def test_identity(self):
        evals, _ = eigendecompose_hermitian(np.eye(4))
        np.testing.assert_allclose(evals, [1, 1, 1, 1])

    def test_quarter_i_plus_zz(self):
        evals, _ = eigendecompose_hermitian((np.eye(4) + PauliString.parse("ZZ").matrix()) / 4)
        np.testing.assert_allclose(evals, [0, 0, 0.5, 0.5], atol=1e-15)

    def test_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            eigendecompose_hermitian(np.array([[0, 1], [0, 0]]))

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), dim=st.sampled_from([2, 4, 8]))
    def test_against_numpy(self, seed, dim):
        g = np.random.default_rng(seed)
        a = g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))
        m = a + a.conj().T
        evals, vecs = eigendecompose_hermitian(m)
        assert np.all(np.diff(evals) >= 0)
        np.testing.assert_allclose(evals, np.linalg.eigvalsh(m), atol=1e-9)
        assert np.abs(vecs @ np.diag(evals) @ vecs.conj().T - m).max() <= 1e-9
        np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(dim), atol=1e-10)

    def test_degenerate_spectrum(self, rng):
        u = random_unitary(8, rng)
        m = u @ np.diag([1, 1, 1, 2, 2, -3, -3, 0]) @ u.conj().T
        evals, vecs = eigendecompose_hermitian((m + m.conj().T) / 2)
        np.testing.assert_allclose(evals, [-3, -3, 0, 1, 1, 1, 2, 2], atol=1e-9)
        assert np.abs(vecs @ np.diag(evals) @ vecs.conj().T - m).max() <= 1e-9


class TestDensityState:
    def test_rejects_bad_trace(self):
        with pytest.raises(InvalidStateError):
            DensityState(np.eye(2))

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidStateError):
            DensityState(np.array([[0.5, 0.5], [0, 0.5]]))

    def test_rejects_negative(self):
        with pytest.raises(InvalidStateError):
            DensityState(np.diag([1.5, -0.5]))

    def test_immutable(self):
        rho = DensityState(projector("0"))
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 0
        with pytest.raises(AttributeError):
            rho.foo = 1

    def test_dims(self):
        assert DensityState(projector("010")).n_qubits == 3
        with pytest.raises(DimensionError):
            DensityState(np.eye(3) / 3)
