"""Link profiles, benefit and cost models, utilities, and welfare."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infogame.entropy import EntropicVector, JointPmf, family_independent, from_joint_pmf
from infogame.formation_game import (
    BenefitFunction,
    CostModel,
    GameConfig,
    LinkProfile,
    benefit_from_config,
    components,
    config_from_dict,
    costs_from_config,
    entropic_vector_from_config,
    is_minimally_connected,
    reachable_set,
    social_welfare,
    topology,
    utility,
)

LOG2 = BenefitFunction.log1p(2.0)
LN = BenefitFunction.log1p(math.e)


class TestBenefitFunction:
    def test_log1p_base2(self):
        assert LOG2(0) == 0.0
        assert LOG2(1) == pytest.approx(1.0)
        assert LOG2(3) == pytest.approx(2.0)
        assert LOG2.deriv(0) == pytest.approx(1 / math.log(2))

    def test_log1p_natural(self):
        assert LN(math.e - 1) == pytest.approx(1.0)
        assert LN.deriv(0) == pytest.approx(1.0)

    def test_power(self):
        f = BenefitFunction.power(0.5)
        assert f(4) == pytest.approx(2.0)
        assert f.deriv(4) == pytest.approx(0.25)
        assert f.deriv(0) == math.inf

    def test_linear(self):
        f = BenefitFunction.linear()
        assert f(2.5) == 2.5
        assert f.deriv(100) == 1.0

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            BenefitFunction.power(1.0)
        with pytest.raises(ValueError):
            BenefitFunction.power(0.0)
        with pytest.raises(ValueError):
            BenefitFunction.log1p(1.0)

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            LOG2(-0.1)


class TestCostModel:
    def test_homogeneous(self):
        cm = CostModel.homogeneous(0.3)
        assert cm.link_cost(0, 5) == 0.3
        assert cm.n_agents is None

    def test_recipient(self):
        cm = CostModel.recipient([0.1, 0.2, 0.3])
        assert cm.link_cost(2, 0) == 0.1
        assert cm.link_cost(0, 2) == 0.3
        assert cm.n_agents == 3

    def test_matrix(self):
        cm = CostModel.matrix([[0, 1.0], [2.0, 0]])
        assert cm.link_cost(0, 1) == 1.0
        assert cm.link_cost(1, 0) == 2.0
        assert cm.min_cost(2) == 1.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            CostModel.homogeneous(-1)
        with pytest.raises(ValueError):
            CostModel.recipient([0.1, -0.2])

    def test_self_link_undefined(self):
        with pytest.raises(ValueError):
            CostModel.homogeneous(1.0).link_cost(1, 1)


class TestLinkProfile:
    def test_diagonal_forbidden(self):
        with pytest.raises(ValueError, match="itself"):
            LinkProfile(2, (1, 0))

    def test_text_round_trip(self):
        p = LinkProfile.from_links(3, [(0, 1), (2, 0)])
        assert p.to_text() == "010\n000\n100\n"
        assert LinkProfile.from_text(p.to_text()) == p

    def test_bitstring_and_index_order(self):
        # lexicographic order of the flattened matrix
        a = LinkProfile.from_links(2, [(1, 0)])  # "0010"
        b = LinkProfile.from_links(2, [(0, 1)])  # "0100"
        assert a.bitstring() == "0010"
        assert b.bitstring() == "0100"
        assert a.index() < b.index()

    def test_from_matrix(self):
        p = LinkProfile.from_matrix([[0, 1], [0, 0]])
        assert p.rows == (2, 0)


class TestTopologyOps:
    def test_single_direction_gives_edge(self):
        p = LinkProfile.from_links(2, [(0, 1)])
        assert topology(p) == ((0, 1),)

    def test_symmetrization(self):
        p = LinkProfile.from_links(2, [(0, 1), (1, 0)])
        assert topology(p) == ((0, 1),)

    def test_empty(self):
        assert topology(LinkProfile.empty(3)) == ()

    def test_components_chain(self):
        p = LinkProfile.from_links(3, [(0, 1), (1, 2)])
        assert components(p) == (frozenset({0, 1, 2}),)
        assert reachable_set(p, 0) == frozenset({1, 2})

    def test_components_split(self):
        p = LinkProfile.from_links(3, [(0, 1)])
        assert components(p) == (frozenset({0, 1}), frozenset({2}))
        assert reachable_set(p, 2) == frozenset()

    def test_components_empty(self):
        assert components(LinkProfile.empty(3)) == (
            frozenset({0}), frozenset({1}), frozenset({2}))

    def test_minimally_connected_star(self):
        p = LinkProfile.from_links(4, [(0, 1), (0, 2), (0, 3)])
        assert is_minimally_connected(p, {0, 1, 2, 3})

    def test_minimally_connected_triangle(self):
        p = LinkProfile.from_links(3, [(0, 1), (1, 2), (2, 0)])
        assert not is_minimally_connected(p, {0, 1, 2})

    def test_minimally_connected_singleton(self):
        assert is_minimally_connected(LinkProfile.empty(2), {1})

    def test_not_a_component_rejected(self):
        p = LinkProfile.from_links(3, [(0, 1), (1, 2)])
        with pytest.raises(ValueError, match="component"):
            is_minimally_connected(p, {0, 1})


class TestPayoffs:
    def test_sponsor_pays(self):
        cfg = GameConfig(family_independent([1, 1]), LOG2, CostModel.homogeneous(0.3))
        p = LinkProfile.from_links(2, [(0, 1)])
        assert utility(cfg, p, 0) == pytest.approx(math.log2(3) - 0.3, abs=1e-12)
        assert utility(cfg, p, 1) == pytest.approx(math.log2(3), abs=1e-12)

    def test_isolated_agent_keeps_own_information(self):
        cfg = GameConfig(family_independent([5, 4, 4]), LOG2, CostModel.homogeneous(0.3))
        p = LinkProfile.empty(3)
        for i, h in enumerate((5, 4, 4)):
            assert utility(cfg, p, i) == pytest.approx(math.log2(1 + h), abs=1e-12)

    def test_welfare_single_link(self):
        cfg = GameConfig(family_independent([1, 1]), LOG2, CostModel.homogeneous(0.3))
        p = LinkProfile.from_links(2, [(0, 1)])
        assert social_welfare(cfg, p) == pytest.approx(2 * math.log2(3) - 0.3, abs=1e-12)

    def test_welfare_empty_network(self):
        cfg = GameConfig(family_independent([5, 4, 4]), LOG2, CostModel.homogeneous(0.3))
        expect = math.log2(6) + 2 * math.log2(5)
        assert social_welfare(cfg, LinkProfile.empty(3)) == pytest.approx(expect, abs=1e-12)

    def test_duplicate_link_costs_exactly_c(self):
        cfg = GameConfig(family_independent([1, 1]), LOG2, CostModel.homogeneous(0.3))
        single = LinkProfile.from_links(2, [(0, 1)])
        double = LinkProfile.from_links(2, [(0, 1), (1, 0)])
        assert social_welfare(cfg, single) - social_welfare(cfg, double) == pytest.approx(0.3)

    def test_connected_profile_benefit_is_joint(self):
        rng = np.random.default_rng(7)
        raw = rng.random((2, 3, 2)) + 0.05
        ev = from_joint_pmf(JointPmf(raw / raw.sum()))
        cfg = GameConfig(ev, LN, CostModel.homogeneous(0.1))
        p = LinkProfile.from_links(3, [(1, 0), (1, 2)])
        for i in range(3):
            benefit = utility(cfg, p, i) + 0.1 * bin(p.rows[i]).count("1")
            assert benefit == pytest.approx(LN(ev.joint_entropy), abs=1e-12)

    @given(st.integers(0, 5000))
    @settings(max_examples=30, deadline=None)
    def test_adding_link_never_hurts_benefit(self, seed):
        rng = np.random.default_rng(seed)
        raw = rng.random((2, 2, 2)) + 0.02
        ev = from_joint_pmf(JointPmf(raw / raw.sum()))
        cfg = GameConfig(ev, LN, CostModel.homogeneous(0.0))
        base = LinkProfile.from_links(3, [(0, 1)])
        more = LinkProfile.from_links(3, [(0, 1), (1, 2)])
        for i in range(3):
            assert utility(cfg, more, i) >= utility(cfg, base, i) - 1e-12

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(11)
        raw = rng.random((2, 2, 3)) + 0.05
        ev = from_joint_pmf(JointPmf(raw / raw.sum()))
        costs = [0.1, 0.25, 0.4]
        perm = [2, 0, 1]  # new index -> old index

        def permute_vector(ev, perm):
            n = ev.n_agents
            entries = [0.0] * ((1 << n) - 1)
            for mask in range(1, 1 << n):
                old = 0
                for new_i in range(n):
                    if mask >> new_i & 1:
                        old |= 1 << perm[new_i]
                entries[mask - 1] = ev.h(old)
            return EntropicVector(n, tuple(entries))

        cfg = GameConfig(ev, LN, CostModel.recipient(costs))
        pcfg = GameConfig(permute_vector(ev, perm), LN,
                          CostModel.recipient([costs[perm[i]] for i in range(3)]))
        inv = {perm[i]: i for i in range(3)}
        p = LinkProfile.from_links(3, [(0, 2), (1, 2)])
        pp = LinkProfile.from_links(3, [(inv[0], inv[2]), (inv[1], inv[2])])
        for i in range(3):
            assert utility(cfg, p, i) == pytest.approx(utility(pcfg, pp, inv[i]), abs=1e-12)

    def test_cycle_welfare_below_spanning_tree(self):
        cfg = GameConfig(family_independent([2, 1, 1]), LN, CostModel.homogeneous(0.2))
        cycle = LinkProfile.from_links(3, [(0, 1), (1, 2), (2, 0)])
        tree = LinkProfile.from_links(3, [(0, 1), (1, 2)])
        assert components(cycle) == components(tree)
        assert social_welfare(cfg, cycle) < social_welfare(cfg, tree)


class TestConfigDocuments:
    def test_benefit_parsing(self):
        assert benefit_from_config({"name": "log1p", "base": "e"}) == LN
        assert benefit_from_config({"name": "power", "alpha": 0.5}).name == "power"
        with pytest.raises(ValueError):
            benefit_from_config({"name": "cubic"})

    def test_costs_parsing(self):
        assert costs_from_config({"model": "homogeneous", "c": 0.5}).kind == "homogeneous"
        assert costs_from_config({"model": "recipient", "c": [1, 2]}).values == (1.0, 2.0)
        with pytest.raises(ValueError):
            costs_from_config({"model": "exotic", "c": 1})

    def test_vector_families(self):
        ev = entropic_vector_from_config({"family": "pair_redundancy", "h": [5, 4, 4], "kl": 2})
        assert ev.joint_entropy == 11.0
        ev = entropic_vector_from_config({"family": "independent", "h": [1, 1]})
        assert ev.joint_entropy == 2.0

    def test_inline_vector_validated(self):
        good = {"inline": {"n_agents": 2, "entries": [[1, 1.0], [2, 1.0], [3, 1.5]]}}
        assert entropic_vector_from_config(good).joint_entropy == 1.5
        bad = {"inline": {"n_agents": 2, "entries": [[1, 1.0], [2, 1.0], [3, 3.0]]}}
        with pytest.raises(ValueError, match="rejected"):
            entropic_vector_from_config(bad)

    def test_full_game_config(self):
        cfg = config_from_dict({
            "entropic_vector": {"family": "independent", "h": [1, 1]},
            "benefit": {"name": "log1p", "base": 2},
            "costs": {"model": "homogeneous", "c": 0.3},
        })
        assert cfg.n_agents == 2
        with pytest.raises(ValueError, match="missing"):
            config_from_dict({"benefit": {"name": "linear"}})

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            GameConfig(family_independent([1, 1]), LOG2, CostModel.recipient([1, 2, 3]))
