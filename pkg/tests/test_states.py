import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cqwitness.errors import InvalidStateError
from cqwitness.operators import expectation, kron, projector, random_density, trace_distance
from cqwitness.states import (
    ClassicalBlochState,
    ProtocolStates,
    Stage,
    bloch_to_state,
    dephase_factor,
    is_discord_free_cq,
    prepare_initial,
    state_to_bloch,
)

PHI_PLUS = projector(np.array([1, 0, 0, 1]))
ZZ = np.diag([1, -1, -1, 1])


def random_family_member(g: np.random.Generator) -> ClassicalBlochState:
    """Classical-on-side-2 state built as a mixture p0 a0 (x) |0><0| + p1 a1 (x) |1><1|."""
    p0 = g.uniform()
    a0, a1 = random_density(2, g).matrix, random_density(2, g).matrix
    rho = p0 * kron(a0, projector("0")) + (1 - p0) * kron(a1, projector("1"))
    b, residual = state_to_bloch(rho)
    assert residual < 1e-12
    return b


class TestPrepareInitial:
    def test_plus(self):
        assert expectation(prepare_initial("+"), "XI") == pytest.approx(1)

    def test_minus(self):
        assert expectation(prepare_initial("-"), "XI") == pytest.approx(-1)

    @pytest.mark.parametrize("sign", "+-")
    def test_t_sharp_with_value_one(self, sign):
        assert expectation(prepare_initial(sign), "IZ") == pytest.approx(1)

    @pytest.mark.parametrize("sign", "+-")
    def test_probe_states_lie_in_family(self, sign):
        _, residual = state_to_bloch(prepare_initial(sign))
        assert residual <= 1e-15

    def test_bad_sign(self):
        with pytest.raises(ValueError):
            prepare_initial("0")


class TestBlochToState:
    def test_forced_solution(self):
        rho = bloch_to_state(ClassicalBlochState(t=(0, 0, 1)))
        np.testing.assert_allclose(rho.matrix, (np.eye(4) + ZZ) / 4, atol=1e-15)

    def test_maximally_mixed(self):
        np.testing.assert_allclose(bloch_to_state(ClassicalBlochState()).matrix, np.eye(4) / 4)

    def test_corner_is_00(self):
        # Oracle: expand 1/4 (II + ZI + IZ + ZZ) entrywise on the diagonal.
        zi, iz = np.diag([1, 1, -1, -1]), np.diag([1, -1, 1, -1])
        oracle = (np.eye(4) + zi + iz + ZZ) / 4
        np.testing.assert_array_equal(oracle, projector("00").real)
        rho = bloch_to_state(ClassicalBlochState(r=(0, 0, 1), s_z=1, t=(0, 0, 1)))
        np.testing.assert_allclose(rho.matrix, oracle, atol=1e-15)

    def test_non_psd_rejected(self):
        with pytest.raises(InvalidStateError):
            ClassicalBlochState(r=(1, 0, 0), t=(0, 0, 1))

    @pytest.mark.parametrize("tau,ok", [(1 - 1e-6, True), (1.0, True), (1 + 1e-6, False), (-1 - 1e-6, False)])
    def test_positivity_boundary(self, tau, ok):
        if ok:
            ClassicalBlochState(t=(0, 0, tau))
        else:
            with pytest.raises(InvalidStateError):
                ClassicalBlochState(t=(0, 0, tau))


class TestStateToBloch:
    def test_bell_state(self):
        b, residual = state_to_bloch(PHI_PLUS)
        assert b.r == pytest.approx((0, 0, 0)) and b.s_z == pytest.approx(0)
        assert b.t == pytest.approx((0, 0, 1))
        # Oracle: Phi+ minus (I+ZZ)/4 has entries 1/2 at (0,3) and (3,0).
        oracle = np.linalg.norm(PHI_PLUS - (np.eye(4) + ZZ) / 4)
        assert oracle == pytest.approx(math.sqrt(2) / 2)
        assert residual == pytest.approx(oracle, abs=1e-12)

    def test_family_member_round_trip(self):
        b, residual = state_to_bloch((np.eye(4) + ZZ) / 4)
        assert b.t == pytest.approx((0, 0, 1)) and residual == pytest.approx(0, abs=1e-15)

    def test_maximally_mixed(self):
        b, residual = state_to_bloch(np.eye(4) / 4)
        assert np.allclose(b.as_vector(), 0) and residual == 0

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_round_trip_property(self, seed):
        b = random_family_member(np.random.default_rng(seed))
        back, residual = state_to_bloch(bloch_to_state(b))
        np.testing.assert_allclose(back.as_vector(), b.as_vector(), atol=1e-12)
        assert residual <= 1e-12

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_family_is_discord_free(self, seed):
        b = random_family_member(np.random.default_rng(seed))
        assert is_discord_free_cq(bloch_to_state(b))


class TestDiscordFree:
    def test_forced_solution(self):
        assert is_discord_free_cq((np.eye(4) + ZZ) / 4)

    def test_bell_state(self):
        # Oracle: dephasing Phi+ removes its two off-diagonal halves; distance 1/2.
        dephased = np.diag([0.5, 0, 0, 0.5])
        np.testing.assert_allclose(dephase_factor(PHI_PLUS, 1), dephased)
        assert trace_distance(PHI_PLUS, dephased) == pytest.approx(0.5)
        assert not is_discord_free_cq(PHI_PLUS)

    def test_product_with_diagonal_second_factor(self, rng):
        for _ in range(10):
            p = rng.uniform()
            assert is_discord_free_cq(kron(random_density(2, rng).matrix, np.diag([p, 1 - p])))


def test_protocol_states_container():
    s = ProtocolStates(prepare_initial("+"), prepare_initial("-"), Stage.AFTER_FIRST_COPY)
    plus, minus = s
    assert plus is s.rho_plus and minus is s.rho_minus
