import math

from hypothesis import given, strategies as st

from dnaplan.diagnostics import (
    ClassifierConfig,
    classify,
    gain_csv_text,
    report_to_json_dict,
    stepwise_gain,
)
from dnaplan.planner import build_graph, plan_unconstrained
from dnaplan.profile import DnaProfile, TimeGrid, uniform_grid
from dnaplan.synthetic import (
    archetype_flat_gain,
    archetype_initial_dip,
    archetype_monotone,
)


def make_profile(points, values):
    return DnaProfile(TimeGrid(tuple(points)), tuple(values))


class TestStepwiseGain:
    def test_decreasing_error_all_positive(self):
        dna = make_profile([0.0, 0.5, 1.0], [0.0, 1.0, 3.0])
        gains = stepwise_gain(dna).gains
        assert gains == (1.0, 2.0)

    def test_constant_error_zero_gain(self):
        dna = make_profile(uniform_grid(5).points, [2.0] * 5)
        assert all(g == 0.0 for g in stepwise_gain(dna).gains)

    def test_dip_at_top_is_negative_first_gain(self):
        dna = make_profile([0.0, 0.5, 0.99, 1.0], [0.0, 1.0, 3.0, 2.5])
        gains = stepwise_gain(dna).gains
        assert gains[-1] < 0.0

    @given(
        values=st.lists(
            st.floats(min_value=0.0, max_value=1e6), min_size=2, max_size=40
        )
    )
    def test_telescoping(self, values):
        grid = uniform_grid(len(values))
        series = stepwise_gain(make_profile(grid.points, values))
        total = sum(series.gains)
        span = values[-1] - values[0]
        assert math.isclose(total, span, rel_tol=1e-12, abs_tol=1e-9)

    def test_midpoints_and_csv(self):
        dna = make_profile([0.0, 0.5, 1.0], [0.0, 1.0, 3.0])
        series = stepwise_gain(dna)
        assert series.midpoints() == (0.25, 0.75)
        assert gain_csv_text(series) == "t_mid,gain\n0.25,1\n0.75,2\n"


class TestClassify:
    def test_monotone_archetype(self):
        report = classify(stepwise_gain(archetype_monotone()))
        assert report.label == "monotone-stable"
        assert report.negative_gain_regions == ()
        assert report.suggested_start == 1.0
        assert report.suggested_stop == 0.0

    def test_initial_dip_archetype(self):
        report = classify(stepwise_gain(archetype_initial_dip()))
        assert report.label == "initial-regressive"
        assert report.suggested_start < 1.0
        regions = report.negative_gain_regions
        assert regions and regions[-1][1] == 1.0

    def test_flat_gain_archetype(self):
        report = classify(stepwise_gain(archetype_flat_gain()))
        assert report.label == "non-convergent"
        assert report.suggested_stop > 0.0

    def test_flat_gain_threshold_arithmetic(self):
        # Constant gain g: late mean = early mean = g, and g > kappa * g for
        # any kappa < 1, so the non-convergence test fires by construction.
        dna = make_profile(uniform_grid(50).points, [2.0 * t for t in uniform_grid(50).points])
        series = stepwise_gain(dna)
        cfg = ClassifierConfig(kappa=0.5)
        late = [g for g, m in zip(series.gains, series.midpoints()) if m < cfg.t_late]
        early = [g for g, m in zip(series.gains, series.midpoints()) if m >= cfg.t_late]
        assert sum(late) / len(late) > cfg.kappa * (sum(early) / len(early))
        assert classify(series, cfg).label == "non-convergent"

    def test_late_oscillation(self):
        # Alternating small gains below t = 0.4, strong positive gains above.
        grid = uniform_grid(41)
        acc = 0.0
        values = [0.0]
        for i in range(1, len(grid.points)):
            t_mid = (grid.points[i - 1] + grid.points[i]) / 2
            gain = 1.0 if t_mid >= 0.4 else (0.05 if i % 2 == 0 else -0.02)
            acc += gain
            values.append(acc)
        base = min(values)
        values = [v - base for v in values]
        report = classify(stepwise_gain(make_profile(grid.points, values)))
        assert report.label == "late-oscillatory"
        assert report.details["late_sign_flips"] >= 3

    def test_scale_invariance(self):
        for arch in (archetype_monotone(), archetype_initial_dip(), archetype_flat_gain()):
            base = classify(stepwise_gain(arch)).label
            for lam in (0.25, 12.0):
                scaled = DnaProfile(arch.grid, tuple(lam * v for v in arch.values))
                assert classify(stepwise_gain(scaled)).label == base

    def test_constant_profile_falls_back_to_stable(self):
        dna = make_profile(uniform_grid(10).points, [3.0] * 10)
        report = classify(stepwise_gain(dna))
        assert report.label == "monotone-stable"
        assert report.details["all_gains_positive"] is False

    def test_start_stop_ordering_invariant(self):
        for arch in (archetype_monotone(), archetype_initial_dip(), archetype_flat_gain()):
            report = classify(stepwise_gain(arch))
            assert report.suggested_start >= report.suggested_stop

    def test_report_json_fields(self):
        doc = report_to_json_dict(classify(stepwise_gain(archetype_monotone())))
        assert list(doc.keys()) == [
            "label",
            "negative_gain_regions",
            "suggested_start",
            "suggested_stop",
            "details",
        ]
        assert doc["details"]["kappa_heuristic"] is True


class TestSuggestionsHelpPlanning:
    def test_released_pins_never_worsen_archetype_costs(self):
        # A suggestion away from a grid extreme releases the matching pin;
        # that only enlarges the feasible path set.
        for arch in (archetype_monotone(), archetype_initial_dip(), archetype_flat_gain()):
            report = classify(stepwise_gain(arch))
            pts = arch.grid.points
            pinned_cost = plan_unconstrained(build_graph(arch)).total_cost
            g = build_graph(
                arch,
                pin_start=report.suggested_start == pts[-1],
                pin_end=report.suggested_stop == pts[0],
            )
            assert plan_unconstrained(g).total_cost <= pinned_cost + 1e-12

    def test_initial_dip_release_is_strictly_better(self):
        arch = archetype_initial_dip()
        report = classify(stepwise_gain(arch))
        assert report.suggested_start < arch.grid.points[-1]
        pinned = plan_unconstrained(build_graph(arch)).total_cost
        released = plan_unconstrained(build_graph(arch, pin_start=False)).total_cost
        assert released < pinned
