import json
from fractions import Fraction

import pytest

from cqwitness.toy import (
    ToyDynamics,
    ToyEpistemicState,
    enumerate_copy_dynamics,
    generated_group,
    ontic_cnot,
    satisfies_copy_table,
    toy_measure_T,
    toy_protocol_row,
    toy_witness_sweep,
    valid_supports,
)


class TestEpistemicStates:
    @pytest.mark.parametrize(
        "support,plus",
        [({1, 2}, Fraction(1)), ({3, 4}, Fraction(0)), ({1, 3}, Fraction(1, 2)), ({1, 2, 3, 4}, Fraction(1, 2))],
    )
    def test_measure_T(self, support, plus):
        out = toy_measure_T(ToyEpistemicState(frozenset(support)))
        assert out[+1] == plus and out[-1] == 1 - plus

    def test_one_bit_valid_count(self):
        # Six pairs that are cosets of a line in Z2^2 (three lines, two cosets) plus the full set.
        assert len(valid_supports(1)) == 7

    def test_two_bit_valid_count(self):
        sizes = sorted(len(s) for s in valid_supports(2))
        assert (sizes.count(4), sizes.count(8), sizes.count(16)) == (60, 30, 1)

    @pytest.mark.parametrize("support", [{1}, {1, 2, 3}, {5, 6}, set()])
    def test_invalid_support(self, support):
        with pytest.raises(ValueError):
            ToyEpistemicState(frozenset(support))

    def test_two_bit_labels(self):
        s = ToyEpistemicState(frozenset({(1, 1), (2, 1), (1, 2), (2, 2)}))
        assert s.n_bits == 2

    def test_two_bit_correlated_state_valid(self):
        # Both bits agree in x with p unconstrained: a maximal-knowledge pair state.
        ToyEpistemicState(frozenset({(1, 1), (2, 2), (3, 3), (4, 4)}))


class TestDynamics:
    def test_group_is_closed_and_unique(self):
        group = generated_group()
        perms = {d.permutation for d in group}
        assert len(perms) == len(group) == 11520
        gens = [group[0]] + [d for d in group if "*" not in d.label]
        for g in gens[:6]:
            for h in list(group)[:200]:
                composed = tuple(g.permutation[h.permutation[i]] for i in range(16))
                assert composed in perms

    def test_cnot_preserves_validity(self):
        assert ontic_cnot().preserves_validity()

    def test_cnot_satisfies_copy_table(self):
        assert satisfies_copy_table(ontic_cnot())

    def test_identity_fails_copy_table(self):
        assert not satisfies_copy_table(ToyDynamics(tuple(range(16))))

    def test_enumeration(self):
        found = enumerate_copy_dynamics()
        assert found
        assert len({d.permutation for d in found}) == len(found)
        assert all(d.preserves_validity() and satisfies_copy_table(d) for d in found)
        assert ontic_cnot().permutation in {d.permutation for d in found}

    def test_bad_permutation(self):
        with pytest.raises(ValueError):
            ToyDynamics((0,) * 16)


class TestProtocolAnalog:
    def test_cnot_row(self):
        row = toy_protocol_row(ontic_cnot())
        for sign in ("rho+", "rho-"):
            assert Fraction(row["stage1"][sign]["ZZ"]) == 1
        assert row["c1"] and row["c2"] and row["c3"] and row["c4"]
        assert Fraction(row["separations"]["XZ"]) == 2

    def test_sweep_summary(self):
        s = toy_witness_sweep()
        assert s["n_dynamics"] == len(s["rows"]) > 0
        assert s["rows"][s["cnot_row"]]["permutation"] == list(ontic_cnot().permutation)
        assert 0 < s["n_all_conditions"] <= s["n_c1_c3"] <= s["n_c1"] <= s["n_dynamics"]

    def test_sweep_deterministic(self):
        a = json.dumps(toy_witness_sweep(), sort_keys=True)
        b = json.dumps(toy_witness_sweep(), sort_keys=True)
        assert a == b

    def test_correlators_bounded(self):
        for row in toy_witness_sweep()["rows"]:
            for block in (*row["stage1"].values(), *row["stage2"].values()):
                assert all(-1 <= Fraction(v) <= 1 for v in block.values())
