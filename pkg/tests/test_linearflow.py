import numpy as np
import pytest

from dnaplan.linearflow import (
    extract_dna,
    extract_dna_mc,
    ideal_state,
    load_scenario,
    make_scenario,
    model_velocity,
    propagate,
    random_scenario,
    rollout,
    rollout_csv_text,
    save_scenario,
    scenario_from_json_dict,
    scenario_to_json_dict,
    verify_lever_identity,
)
from dnaplan.planner import build_graph, plan_fixed
from dnaplan.profile import TimeGrid, transition_cost, uniform_grid


def scalar_world(e_values, grid=None, x0=0.0, z=2.0):
    grid = grid or uniform_grid(len(e_values))
    return make_scenario([x0], [z], [1.0], grid, e_values)


class TestIdealState:
    def test_endpoints(self):
        s = scalar_world([0.0, 0.0])
        assert ideal_state(s, 0.0)[0] == 0.0
        assert ideal_state(s, 1.0)[0] == 2.0

    def test_midpoint(self):
        s = scalar_world([0.0, 0.0])
        assert ideal_state(s, 0.5)[0] == 1.0

    def test_out_of_range(self):
        s = scalar_world([0.0, 0.0])
        with pytest.raises(ValueError):
            ideal_state(s, 1.5)


class TestModelVelocity:
    def test_perfect_model_gives_true_velocity(self):
        s = scalar_world([0.0, 0.0, 0.0])
        for t in (0.25, 0.5, 1.0):
            assert model_velocity(s, t)[0] == pytest.approx(2.0, abs=1e-15)

    def test_scalar_example(self):
        grid = TimeGrid((0.0, 0.5, 1.0))
        s = scalar_world([0.0, 0.1, 0.0], grid=grid)
        assert model_velocity(s, 0.5)[0] == pytest.approx(1.8, abs=1e-15)

    def test_velocity_error_identity(self):
        rng = np.random.default_rng(0)
        s = random_scenario(rng)
        v_true = s.z - s.x0
        for t in (0.2, 0.61, 0.97):
            lhs = t * (v_true - model_velocity(s, t))
            rhs = s.error_at(t) * s.direction
            assert np.allclose(lhs, rhs, atol=1e-12)

    def test_undefined_at_zero(self):
        s = scalar_world([0.0, 0.0])
        with pytest.raises(ValueError):
            model_velocity(s, 0.0)


class TestPropagate:
    def test_zero_length_jump(self):
        s = scalar_world([0.3, 0.3, 0.3])
        assert np.array_equal(propagate(s, 0.5, 0.5), ideal_state(s, 0.5))

    def test_perfect_model_stays_on_trajectory(self):
        rng = np.random.default_rng(1)
        s = make_scenario(
            rng.normal(size=5), rng.normal(size=5),
            np.eye(5)[0], uniform_grid(8), [0.0] * 8,
        )
        for t, k in ((1.0, 0.0), (0.8, 0.15), (0.5, 0.49)):
            assert np.allclose(propagate(s, t, k), ideal_state(s, k), atol=1e-14)

    def test_scalar_example(self):
        grid = TimeGrid((0.0, 0.5, 1.0))
        s = scalar_world([0.0, 0.1, 0.0], grid=grid)
        assert propagate(s, 0.5, 0.25)[0] == pytest.approx(0.55, abs=1e-15)

    def test_ordering_violation(self):
        s = scalar_world([0.0, 0.0])
        with pytest.raises(ValueError):
            propagate(s, 0.3, 0.6)


class TestLeverIdentity:
    def test_randomized_sweep(self):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(1000):
            s = random_scenario(rng)
            t = float(rng.uniform(0.01, 1.0))
            k = float(rng.uniform(0.0, t))
            worst = max(worst, verify_lever_identity(s, t, k))
        assert worst <= 1e-10

    def test_zero_error_zero_residual(self):
        # Only division dust survives: the drift itself is ~1 ulp.
        s = scalar_world([0.0, 0.0, 0.0])
        assert verify_lever_identity(s, 0.8, 0.3) <= 1e-30

    def test_full_jump_drift_equals_error(self):
        grid = TimeGrid((0.0, 1.0))
        s = scalar_world([0.0, 0.7], grid=grid)
        drift = propagate(s, 1.0, 0.0) - ideal_state(s, 0.0)
        assert float(drift @ drift) == pytest.approx(0.49, abs=1e-12)


class TestExtractDna:
    def test_zero_error_gives_zero_profile(self):
        s = scalar_world([0.0] * 5)
        dna = extract_dna(s, uniform_grid(5))
        assert all(v == 0.0 for v in dna.values)

    def test_linear_error_gives_squared_grid(self):
        grid = uniform_grid(11)
        s = scalar_world(list(grid.points), grid=grid)
        dna = extract_dna(s, grid)
        for t, v in zip(grid.points, dna.values):
            assert v == pytest.approx(t * t, rel=1e-14, abs=1e-300)

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        s = random_scenario(rng, n_points=20)
        dna = extract_dna(s, uniform_grid(20))
        from dnaplan.profile import load_profile, save_profile

        path = tmp_path / "extracted.json"
        save_profile(dna, path)
        back = load_profile(path)
        assert back.grid.points == dna.grid.points
        assert back.values == dna.values

    def test_expectation_mode_matches_single_reference(self):
        # The error model does not depend on the endpoint draw, so the
        # Monte-Carlo average equals the one-shot measurement.
        rng = np.random.default_rng(8)
        s = random_scenario(rng, n_points=12)
        grid = uniform_grid(12)
        single = extract_dna(s, grid)
        averaged = extract_dna_mc(s, grid, n_draws=16, rng=np.random.default_rng(9))
        for a, b in zip(averaged.values, single.values):
            assert a == pytest.approx(b, rel=1e-12)


class TestRollout:
    def test_anchored_drift_sum_matches_jump_costs(self):
        rng = np.random.default_rng(4)
        s = random_scenario(rng, n_points=40)
        grid = uniform_grid(40)
        dna = extract_dna(s, grid)
        sched = [grid.points[i] for i in (39, 31, 22, 11, 0)]
        rep = rollout(s, sched, correction=True)
        w_sum = sum(
            transition_cost(dna, grid.index_of(sched[a]), grid.index_of(sched[a + 1]))
            for a in range(len(sched) - 1)
        )
        assert abs(rep.total_drift_sq - w_sum) <= 1e-10

    def test_planned_beats_uniform_drift(self):
        rng = np.random.default_rng(5)
        grid = uniform_grid(51)
        e_vals = [0.9 * t * t + 0.05 * t for t in grid.points]
        s = make_scenario(
            rng.normal(size=6), rng.normal(size=6),
            np.eye(6)[1], grid, e_vals,
        )
        dna = extract_dna(s, grid)
        g = build_graph(dna)
        planned = plan_fixed(g, 10)
        uniform = [grid.points[i] for i in range(50, -1, -5)]
        rep_p = rollout(s, planned.timesteps, correction=True)
        rep_u = rollout(s, uniform, correction=True)
        assert rep_p.total_drift_sq <= rep_u.total_drift_sq + 1e-12

    def test_zero_error_any_schedule_is_free(self):
        s = scalar_world([0.0] * 6)
        rep = rollout(s, [1.0, 0.6, 0.2, 0.0])
        assert rep.final_err_sq == 0.0
        assert rep.total_drift_sq == 0.0

    def test_single_full_jump_final_error(self):
        grid = TimeGrid((0.0, 1.0))
        s = scalar_world([0.0, 0.5], grid=grid)
        rep = rollout(s, [1.0, 0.0])
        assert rep.final_err_sq == pytest.approx(0.25, abs=1e-14)

    def test_uncorrected_rollout_compounds(self):
        rng = np.random.default_rng(6)
        s = random_scenario(rng, n_points=30, error_scale=0.5)
        sched = [1.0, 0.75, 0.5, 0.25, 0.05]
        on = rollout(s, sched, correction=True)
        off = rollout(s, sched, correction=False)
        assert off.drift_sq[-1] >= on.drift_sq[-1] - 1e-12

    def test_csv_format(self):
        s = scalar_world([0.0, 0.1, 0.0], grid=TimeGrid((0.0, 0.5, 1.0)))
        text = rollout_csv_text(rollout(s, [1.0, 0.5, 0.0]))
        lines = text.strip().split("\n")
        assert lines[0] == "step,t,drift_sq,err_sq"
        assert len(lines) == 4

    def test_bad_schedules_rejected(self):
        s = scalar_world([0.0, 0.0])
        with pytest.raises(ValueError):
            rollout(s, [1.0])
        with pytest.raises(ValueError):
            rollout(s, [0.5, 0.7])


class TestScenarioValidation:
    def test_direction_must_be_unit(self):
        with pytest.raises(ValueError):
            make_scenario([0.0], [1.0], [2.0], uniform_grid(3), [0.0, 0.0, 0.0])

    def test_negative_error_rejected(self):
        with pytest.raises(ValueError):
            make_scenario([0.0], [1.0], [1.0], uniform_grid(3), [0.0, -0.1, 0.0])

    def test_json_round_trip(self, tmp_path):
        rng = np.random.default_rng(7)
        s = random_scenario(rng, d_sim=4, n_points=6)
        path = tmp_path / "scen.json"
        save_scenario(s, path)
        back = load_scenario(path)
        assert np.array_equal(back.x0, s.x0)
        assert np.array_equal(back.z, s.z)
        assert back.error_values == s.error_values
        doc = scenario_to_json_dict(s)
        assert set(doc) == {"x0", "z", "u", "e"}
        again = scenario_from_json_dict(doc)
        assert np.array_equal(again.direction, s.direction)
