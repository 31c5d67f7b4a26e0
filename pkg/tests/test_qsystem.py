import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rabichirp import (DegeneracyError, SystemLoadError, TransitionPair, coupling_ratio,
                       load_system, perturber_sets, transition_sign_and_freq)


def doc(levels, dipoles):
    return json.dumps({
        "levels": [{"id": i, "label": f"l{i}", "energy_au": e} for i, e in enumerate(levels)],
        "dipoles": [{"i": i, "j": j, "mu_au": v} for i, j, v in dipoles],
    })


class TestLoadSystem:
    def test_hf3_fixture(self, sys_hf3):
        assert sys_hf3.n == 3
        assert sys_hf3.mu(1, 0) == 0.073
        assert sys_hf3.mu(1, 2) == 0.098
        assert sys_hf3.mu(0, 2) == 0.0
        assert sys_hf3.levels[0].label == "v0j2"

    def test_symmetry_violation_rejected(self):
        bad = doc([0.0, 1.0, 2.0], [(0, 1, 0.5), (1, 0, 0.4)])
        with pytest.raises(SystemLoadError, match="asymmetric"):
            load_system(bad)

    def test_both_orders_consistent_ok(self):
        ok = doc([0.0, 1.0], [(0, 1, 0.5), (1, 0, 0.5)])
        assert load_system(ok).mu(0, 1) == 0.5

    def test_minimal_two_level(self):
        sys_ = load_system(doc([0.0, 0.017671], [(0, 1, 0.073)]))
        assert sys_.n == 2
        assert sys_.mu(0, 1) == 0.073

    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(SystemLoadError, match="diagonal"):
            load_system(doc([0.0, 1.0], [(1, 1, 0.2)]))

    def test_duplicate_ids_rejected(self):
        bad = json.dumps({"levels": [
            {"id": 0, "label": "a", "energy_au": 0.0},
            {"id": 0, "label": "b", "energy_au": 1.0},
        ], "dipoles": []})
        with pytest.raises(SystemLoadError, match="duplicate"):
            load_system(bad)

    def test_parse_failure(self):
        with pytest.raises(SystemLoadError, match="JSON"):
            load_system(b"{nope")

    def test_nonfinite_energy_rejected(self):
        with pytest.raises(SystemLoadError, match="finite"):
            load_system(doc([0.0, float("inf")], [(0, 1, 0.1)]))

    def test_single_level_rejected(self):
        with pytest.raises(SystemLoadError, match="at least 2"):
            load_system(json.dumps({"levels": [{"id": 0, "label": "a", "energy_au": 0.0}],
                                    "dipoles": []}))

    def test_unknown_level_in_dipole(self):
        with pytest.raises(SystemLoadError, match="unknown level"):
            load_system(doc([0.0, 1.0], [(0, 5, 0.1)]))

    def test_dipole_matrix_immutable(self, sys_hf3):
        with pytest.raises(ValueError):
            sys_hf3.dipoles[0, 1] = 99.0


class TestTransitionSignAndFreq:
    def test_hf3_beta_alpha(self, sys_hf3):
        s, w = transition_sign_and_freq(sys_hf3, 1, 0)
        assert s == 1
        assert w == pytest.approx(0.017671, rel=1e-12)

    def test_hf3_beta_p(self, sys_hf3):
        s, w = transition_sign_and_freq(sys_hf3, 1, 2)
        assert s == -1
        assert w == pytest.approx(0.017611, rel=1e-12)

    def test_antisymmetry(self, sys_hf3):
        for i in range(3):
            for j in range(3):
                if i == j:
                    continue
                si, wi = transition_sign_and_freq(sys_hf3, i, j)
                sj, wj = transition_sign_and_freq(sys_hf3, j, i)
                assert si == -sj
                assert wi == wj
                assert wi >= 0

    def test_degenerate_raises(self):
        sys_ = load_system(doc([0.0, 0.0, 1.0], [(0, 2, 0.1)]))
        with pytest.raises(DegeneracyError):
            transition_sign_and_freq(sys_, 0, 1)

    def test_same_level_rejected(self, sys_hf3):
        with pytest.raises(ValueError):
            transition_sign_and_freq(sys_hf3, 1, 1)

    @given(e=st.lists(st.floats(min_value=-10, max_value=10, allow_nan=False),
                      min_size=2, max_size=5, unique=True))
    @settings(max_examples=50, deadline=None)
    def test_antisymmetry_property(self, e):
        sys_ = load_system(doc(e, [(0, 1, 0.1)]))
        for i in range(len(e)):
            for j in range(i + 1, len(e)):
                si, wi = transition_sign_and_freq(sys_, i, j)
                sj, wj = transition_sign_and_freq(sys_, j, i)
                assert si == -sj and wi == wj


class TestCouplingRatio:
    def test_hf3_bp_over_ba(self, sys_hf3, pair01):
        r = coupling_ratio(sys_hf3, pair01, 1, 2)
        assert r == pytest.approx(0.098 / 0.073, rel=1e-12)
        assert r == pytest.approx(1.342466, rel=1e-6)

    def test_self_ratio_is_one(self, sys_hf3, pair01):
        assert coupling_ratio(sys_hf3, pair01, 0, 1) == 1.0

    def test_uncoupled_is_zero(self, sys_hf3, pair01):
        assert coupling_ratio(sys_hf3, pair01, 0, 2) == 0.0


class TestPerturberSets:
    def test_hf3(self, sys_hf3, pair01):
        q, p = perturber_sets(sys_hf3, pair01)
        assert q == []
        assert p == [2]

    def test_two_level(self, sys_two, pair01):
        assert perturber_sets(sys_two, pair01) == ([], [])

    def test_four_level_chain(self):
        # alpha-beta-p1 chain plus beta-p2
        sys_ = load_system(doc([0.0, 1.0, 2.1, 3.3],
                               [(0, 1, 0.1), (1, 2, 0.2), (1, 3, 0.3)]))
        q, p = perturber_sets(sys_, TransitionPair(0, 1))
        assert q == []
        assert p == [2, 3]

    def test_level_coupled_to_both_in_both_sets(self):
        sys_ = load_system(doc([0.0, 1.0, 2.1], [(0, 1, 0.1), (0, 2, 0.2), (1, 2, 0.3)]))
        q, p = perturber_sets(sys_, TransitionPair(0, 1))
        assert q == [2] and p == [2]

    def test_never_contains_selected(self, sys_multi12, pair01):
        q, p = perturber_sets(sys_multi12, pair01)
        assert 0 not in q + p and 1 not in q + p
        assert all(sys_multi12.mu(0, k) != 0 for k in q)
        assert all(sys_multi12.mu(1, k) != 0 for k in p)

    def test_perturber_degenerate_with_selected(self):
        sys_ = load_system(doc([0.0, 1.0, 0.0], [(0, 1, 0.1), (0, 2, 0.2)]))
        with pytest.raises(DegeneracyError):
            perturber_sets(sys_, TransitionPair(0, 1))

    def test_perturber_frequency_equal_to_driven(self):
        # w_bp == w_ab: the strength denominator would vanish
        sys_ = load_system(doc([0.0, 1.0, 2.0], [(0, 1, 0.1), (1, 2, 0.2)]))
        with pytest.raises(DegeneracyError):
            perturber_sets(sys_, TransitionPair(0, 1))

    def test_uncoupled_pair_rejected(self, sys_hf3):
        with pytest.raises(ValueError, match="not dipole-coupled"):
            perturber_sets(sys_hf3, TransitionPair(0, 2))

    def test_identical_pair_rejected(self):
        with pytest.raises(ValueError):
            TransitionPair(1, 1)
