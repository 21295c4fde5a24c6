from __future__ import annotations

import random

import pytest

from carbonsched.carbon import CarbonIntensity, PowerModel
from carbonsched.scoring import (
    MODE_PRESETS,
    NodeSpec,
    NodeStats,
    ScoreWeights,
    SelectionFilters,
    TaskRequest,
    balance_score,
    carbon_score,
    has_sufficient_resources,
    load_score,
    performance_score,
    resource_score,
    score_node,
    select_node,
    update_stats,
)


def _node(
    node_id: str = "n0",
    cpu: float = 1.0,
    mem: float = 1.0,
    intensity: float = 500.0,
    base_w: float = 10.0,
    index: int = 0,
    probe_latency_ms: float = 0.0,
) -> NodeSpec:
    return NodeSpec(
        node_id=node_id,
        cpu_quota=cpu,
        mem_gb=mem,
        intensity=CarbonIntensity(grams_per_kwh=intensity),
        power=PowerModel(base_w=base_w, per_cpu_w=0.0, ram_w_per_gb=0.0),
        declaration_index=index,
        probe_latency_ms=probe_latency_ms,
    )


class TestScoreWeights:
    def test_presets_sum_to_one(self):
        for weights in MODE_PRESETS.values():
            total = weights.w_r + weights.w_l + weights.w_p + weights.w_b + weights.w_c
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_performance_preset(self):
        w = MODE_PRESETS["performance"]
        assert (w.w_r, w.w_l, w.w_p, w.w_b, w.w_c) == (0.25, 0.25, 0.30, 0.15, 0.05)

    def test_green_preset(self):
        w = MODE_PRESETS["green"]
        assert (w.w_r, w.w_l, w.w_p, w.w_b, w.w_c) == (0.15, 0.15, 0.10, 0.10, 0.50)

    def test_balanced_preset(self):
        w = MODE_PRESETS["balanced"]
        assert (w.w_r, w.w_l, w.w_p, w.w_b, w.w_c) == (0.20, 0.20, 0.15, 0.15, 0.30)

    def test_sum_violation_rejected(self):
        with pytest.raises(ValueError):
            ScoreWeights(w_r=0.5, w_l=0.5, w_p=0.5, w_b=0.0, w_c=0.0)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            ScoreWeights(w_r=-0.1, w_l=0.4, w_p=0.3, w_b=0.2, w_c=0.2)

    def test_single_axis_weights_allowed(self):
        w = ScoreWeights(w_r=0.0, w_l=0.0, w_p=0.0, w_b=0.0, w_c=1.0)
        assert w.w_c == 1.0


class TestComponentScores:
    def test_resource_score_empty_node_half_task(self):
        node = _node(cpu=1.0, mem=1.0)
        task = TaskRequest(required_cpu=0.5, required_mem_gb=0.5)
        assert resource_score(node, NodeStats(), task) == pytest.approx(0.5)

    def test_resource_score_zero_demand(self):
        assert resource_score(_node(), NodeStats(), TaskRequest()) == 1.0

    def test_resource_score_exhausting_task(self):
        node = _node(cpu=1.0, mem=1.0)
        stats = NodeStats(cpu_used=0.5, mem_used_gb=0.0)
        task = TaskRequest(required_cpu=0.5, required_mem_gb=0.2)
        assert resource_score(node, stats, task) == pytest.approx(0.0)

    def test_resource_score_tracks_tighter_dimension(self):
        node = _node(cpu=1.0, mem=1.0)
        task = TaskRequest(required_cpu=0.1, required_mem_gb=0.6)
        assert resource_score(node, NodeStats(), task) == pytest.approx(0.4)

    def test_load_score(self):
        assert load_score(NodeStats(load=0.0)) == 1.0
        assert load_score(NodeStats(load=1.0)) == 0.0
        assert load_score(NodeStats(load=0.35)) == pytest.approx(0.65)

    def test_performance_score(self):
        assert performance_score(NodeStats(avg_time_s=0.0)) == 1.0
        assert performance_score(NodeStats(avg_time_s=1.0)) == 0.5
        assert performance_score(NodeStats(avg_time_s=0.255)) == pytest.approx(0.7968, abs=1e-4)

    def test_balance_score(self):
        assert balance_score(NodeStats(task_count=0)) == 1.0
        assert balance_score(NodeStats(task_count=1)) == pytest.approx(1.0 / 3.0)
        assert balance_score(NodeStats(task_count=5)) == pytest.approx(1.0 / 11.0)

    def test_carbon_score_idle_history_is_max(self):
        assert carbon_score(_node(intensity=620.0), NodeStats(avg_time_s=0.0)) == 1.0

    def test_carbon_score_low_intensity(self):
        # 10 W node, 270 ms history, 380 g/kWh
        node = _node(intensity=380.0, base_w=10.0)
        stats = NodeStats(avg_time_s=0.270)
        assert carbon_score(node, stats) == pytest.approx(0.7782, abs=1e-4)

    def test_carbon_score_high_intensity(self):
        node = _node(intensity=620.0, base_w=10.0)
        stats = NodeStats(avg_time_s=0.270)
        assert carbon_score(node, stats) == pytest.approx(0.6826, abs=1e-4)

    def test_carbon_score_decreases_with_intensity(self):
        stats = NodeStats(avg_time_s=0.5)
        high = carbon_score(_node(intensity=700.0), stats)
        low = carbon_score(_node(intensity=100.0), stats)
        assert high < low


class TestFeasibility:
    def test_exact_fit_is_sufficient(self):
        node = _node(cpu=1.0, mem=1.0)
        stats = NodeStats(cpu_used=0.5, mem_used_gb=0.5)
        task = TaskRequest(required_cpu=0.5, required_mem_gb=0.5)
        assert has_sufficient_resources(node, stats, task)

    def test_oversized_task_is_insufficient(self):
        node = _node(cpu=0.4, mem=0.5)
        task = TaskRequest(required_cpu=0.5, required_mem_gb=0.1)
        assert not has_sufficient_resources(node, NodeStats(), task)


class TestSelectNode:
    def test_no_feasible_node_returns_none(self):
        candidates = [
            (_node("a", index=0), NodeStats(load=0.9)),
            (_node("b", index=1), NodeStats(load=0.95)),
        ]
        assert select_node(TaskRequest(), candidates, MODE_PRESETS["balanced"]) is None

    def test_load_exactly_at_threshold_passes(self):
        candidates = [(_node("a"), NodeStats(load=0.8))]
        chosen = select_node(TaskRequest(), candidates, MODE_PRESETS["balanced"])
        assert chosen is not None and chosen[0] == "a"

    def test_latency_filter(self):
        candidates = [
            (_node("slow", probe_latency_ms=600.0), NodeStats(latency_ms=600.0)),
            (_node("ok", index=1), NodeStats()),
        ]
        chosen = select_node(TaskRequest(), candidates, MODE_PRESETS["performance"])
        assert chosen is not None and chosen[0] == "ok"

    def test_identical_nodes_tie_keeps_first_declared(self):
        candidates = [
            (_node("first", index=0), NodeStats()),
            (_node("second", index=1), NodeStats()),
        ]
        chosen = select_node(TaskRequest(), candidates, MODE_PRESETS["performance"])
        assert chosen is not None and chosen[0] == "first"

    def test_breakdown_total_is_weighted_sum(self):
        node = _node(intensity=380.0)
        stats = NodeStats(load=0.2, avg_time_s=0.3, task_count=1)
        weights = MODE_PRESETS["balanced"]
        br = score_node(node, stats, TaskRequest(required_cpu=0.1, required_mem_gb=0.1), weights)
        expected = (
            weights.w_r * br.s_r
            + weights.w_l * br.s_l
            + weights.w_p * br.s_p
            + weights.w_b * br.s_b
            + weights.w_c * br.s_c
        )
        assert br.total == pytest.approx(expected, rel=1e-12)

    @staticmethod
    def _random_candidates(rng: random.Random, n: int) -> list[tuple[NodeSpec, NodeStats]]:
        out = []
        for i in range(n):
            node = NodeSpec(
                node_id=f"n{i}",
                cpu_quota=rng.uniform(0.2, 4.0),
                mem_gb=rng.uniform(0.25, 8.0),
                intensity=CarbonIntensity(grams_per_kwh=rng.uniform(50.0, 900.0)),
                power=PowerModel(
                    base_w=rng.uniform(0.0, 20.0),
                    per_cpu_w=rng.uniform(0.0, 150.0),
                    ram_w_per_gb=0.375,
                ),
                declaration_index=i,
            )
            stats = NodeStats(
                load=rng.uniform(0.0, 1.0),
                avg_time_s=rng.uniform(0.0, 2.0),
                task_count=rng.randint(0, 5),
                latency_ms=rng.uniform(0.0, 800.0),
                cpu_used=rng.uniform(0.0, node.cpu_quota),
                mem_used_gb=rng.uniform(0.0, node.mem_gb),
            )
            out.append((node, stats))
        return out

    def _feasible(self, task, candidates, filters):
        keep = []
        for node, stats in candidates:
            if stats.load > filters.load_max:
                continue
            if stats.latency_ms > filters.latency_threshold_ms:
                continue
            if not has_sufficient_resources(node, stats, task):
                continue
            keep.append((node, stats))
        return keep

    def test_pure_carbon_weight_is_argmax_of_carbon_score(self):
        rng = random.Random(42)
        weights = ScoreWeights(w_r=0.0, w_l=0.0, w_p=0.0, w_b=0.0, w_c=1.0)
        filters = SelectionFilters()
        for _ in range(100):
            candidates = self._random_candidates(rng, rng.randint(1, 8))
            task = TaskRequest(required_cpu=rng.uniform(0.0, 0.5), required_mem_gb=rng.uniform(0.0, 0.5))
            chosen = select_node(task, candidates, weights, filters)
            feasible = self._feasible(task, candidates, filters)
            if not feasible:
                assert chosen is None
                continue
            best = max(feasible, key=lambda pair: carbon_score(pair[0], pair[1]))
            assert chosen is not None
            assert chosen[0] == best[0].node_id

    def test_pure_performance_weight_is_argmax_of_performance_score(self):
        rng = random.Random(43)
        weights = ScoreWeights(w_r=0.0, w_l=0.0, w_p=1.0, w_b=0.0, w_c=0.0)
        filters = SelectionFilters()
        for _ in range(100):
            candidates = self._random_candidates(rng, rng.randint(1, 8))
            task = TaskRequest()
            chosen = select_node(task, candidates, weights, filters)
            feasible = self._feasible(task, candidates, filters)
            if not feasible:
                assert chosen is None
                continue
            best = max(feasible, key=lambda pair: performance_score(pair[1]))
            assert chosen is not None
            assert chosen[0] == best[0].node_id

    def test_components_and_total_stay_in_unit_interval(self):
        rng = random.Random(44)
        for _ in range(1000):
            candidates = self._random_candidates(rng, 1)
            node, stats = candidates[0]
            task = TaskRequest(required_cpu=rng.uniform(0.0, 1.0), required_mem_gb=rng.uniform(0.0, 1.0))
            name = rng.choice(list(MODE_PRESETS))
            br = score_node(node, stats, task, MODE_PRESETS[name])
            for value in (br.s_r, br.s_l, br.s_p, br.s_b, br.s_c, br.total):
                assert 0.0 <= value <= 1.0

    def test_raising_own_intensity_never_raises_own_total(self):
        rng = random.Random(45)
        for _ in range(200):
            candidates = self._random_candidates(rng, 1)
            node, stats = candidates[0]
            task = TaskRequest()
            name = rng.choice(list(MODE_PRESETS))
            before = score_node(node, stats, task, MODE_PRESETS[name]).total
            bumped = NodeSpec(
                node_id=node.node_id,
                cpu_quota=node.cpu_quota,
                mem_gb=node.mem_gb,
                intensity=CarbonIntensity(grams_per_kwh=node.intensity.grams_per_kwh * rng.uniform(1.0, 3.0)),
                power=node.power,
                declaration_index=node.declaration_index,
            )
            after = score_node(bumped, stats, task, MODE_PRESETS[name]).total
            assert after <= before + 1e-12


class TestUpdateStats:
    def test_first_completion_sets_average(self):
        stats = NodeStats(task_count=1)
        updated = update_stats(stats, 0.2)
        assert updated.avg_time_s == pytest.approx(0.2)
        assert updated.completed == 1
        assert updated.task_count == 0

    def test_running_mean(self):
        stats = update_stats(NodeStats(task_count=2), 0.2)
        stats = update_stats(stats, 0.4)
        assert stats.avg_time_s == pytest.approx(0.3)
        assert stats.completed == 2

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            update_stats(NodeStats(), -0.1)
