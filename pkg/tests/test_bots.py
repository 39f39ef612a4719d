import csv
import io
import json

import numpy as np
import pytest

from digsite.bots import (
    METRICS_COLUMNS,
    RandomCarver,
    RiskAverse,
    SurfaceFollower,
    _dig_orientation,
    compare_tools,
    metrics_csv,
    run_bot,
    run_bot_detailed,
    summary_json,
)
from digsite.errors import SessionError
from digsite.geom import Pose
from digsite.voxel import Brush


def short_params(spec, seconds=30.0):
    return spec.session_params.merged({"time_limit_s": seconds})


def test_random_carver_is_deterministic(sphere_spec):
    a = run_bot_detailed(sphere_spec, RandomCarver(seed=4), max_strokes=60)
    b = run_bot_detailed(sphere_spec, RandomCarver(seed=4), max_strokes=60)
    assert a.report == b.report
    assert a.session.export_replay() == b.session.export_replay()
    assert a.session.serialized_events() == b.session.serialized_events()
    c = run_bot_detailed(sphere_spec, RandomCarver(seed=5), max_strokes=60)
    assert c.session.export_replay() != a.session.export_replay()


def test_seed_argument_overrides_policy_seed(sphere_spec):
    policy = RandomCarver(seed=4)
    a = run_bot_detailed(sphere_spec, policy, max_strokes=30, seed=9)
    b = run_bot_detailed(sphere_spec, RandomCarver(seed=9), max_strokes=30)
    assert a.session.export_replay() == b.session.export_replay()
    assert a.session.seed == 9


def test_random_carver_digs_and_gets_hit(sphere_spec):
    report, metrics = run_bot(
        sphere_spec, RandomCarver(seed=1), params=short_params(sphere_spec)
    )
    assert report.status == "TIME_UP"
    assert metrics.strokes > 400  # 15 strokes/s for 30 s
    assert metrics.removed_volume > 0.0
    assert metrics.exposure > 0.0
    assert metrics.hits > 0  # blind digging bumps the relic
    assert metrics.duration == 30.0


def test_stroke_cadence_is_fixed_rate(sphere_spec):
    run = run_bot_detailed(sphere_spec, RandomCarver(seed=2), max_strokes=10)
    lines = run.session.export_replay().splitlines()
    strokes = [json.loads(line) for line in lines[1:] if '"stroke"' in line]
    dt = 1.0 / 15.0
    assert [rec["t"] for rec in strokes] == [k * dt for k in range(1, 11)]


def test_surface_follower_tunnels_toward_relic(sphere_spec):
    report, metrics = run_bot(sphere_spec, SurfaceFollower(seed=3), max_strokes=200)
    # greedy digging finds the centered relic well inside the stroke budget
    assert metrics.strokes <= 200
    assert metrics.completion or metrics.exposure > 0.05
    _, random_metrics = run_bot(sphere_spec, RandomCarver(seed=3), max_strokes=200)
    assert metrics.exposure > random_metrics.exposure


def test_risk_averse_completes_without_hits(sphere_spec):
    report, metrics = run_bot(sphere_spec, RiskAverse(seed=0))
    assert report.status == "COMPLETED"
    assert metrics.completion
    assert metrics.hits == 0
    assert report.health == sphere_spec.session_params.max_health


def test_max_strokes_caps_the_run(sphere_spec):
    report, metrics = run_bot(sphere_spec, RandomCarver(seed=6), max_strokes=25)
    assert metrics.strokes == 25
    assert report.status == "TIME_UP"  # run is ticked out to the limit
    assert metrics.duration == sphere_spec.session_params.time_limit


def test_exposure_curve_is_monotone(sphere_spec):
    _, metrics = run_bot(
        sphere_spec, SurfaceFollower(seed=1), params=short_params(sphere_spec, 20.0)
    )
    curve = metrics.exposure_curve
    assert curve[0] == (0.0, 0.0)
    times = [p[0] for p in curve]
    values = [p[1] for p in curve]
    assert times == sorted(times)
    assert values == sorted(values)
    assert metrics.exposure == values[-1]


def test_policy_validation_rejects_bad_fields(sphere_spec):
    for policy in (
        RandomCarver(strokes_per_s=0.0),
        SurfaceFollower(stand_off=-0.01),
        RiskAverse(sdf_margin=-1.0),
    ):
        with pytest.raises(ValueError):
            run_bot(sphere_spec, policy, max_strokes=1)


def test_dig_orientation_aligns_brush_axes():
    d = np.array([0.3, -0.5, 0.8])
    d /= np.linalg.norm(d)
    sphere_q = _dig_orientation(Brush.sphere(0.05), d)
    R = Pose((0.0, 0.0, 0.0), tuple(sphere_q)).rotation_matrix()
    assert np.allclose(R[:, 2], d)  # brush z looks along the dig direction
    box = Brush.box((0.10, 0.06, 0.015))
    box_q = _dig_orientation(box, d)
    assert np.isclose(np.linalg.norm(box_q), 1.0)
    R = Pose((0.0, 0.0, 0.0), tuple(box_q)).rotation_matrix()
    # longest half-extent (local x) must lie on the dig line
    assert np.isclose(abs(float(R[:, 0] @ d)), 1.0)


def test_compare_tools_runs_equal_stroke_budgets(sphere_spec):
    rows = compare_tools(
        sphere_spec, RandomCarver(seed=2), ("hammer", "shovel"), max_strokes=40
    )
    assert set(rows) == {"hammer", "shovel"}
    assert rows["hammer"].strokes == rows["shovel"].strokes == 40
    assert rows["hammer"].removed_volume > 0.0
    with pytest.raises(SessionError, match="unknown tool"):
        compare_tools(sphere_spec, RandomCarver(seed=2), ("hammer", "pick"))


def test_metrics_csv_round_trips(sphere_spec):
    _, m1 = run_bot(sphere_spec, RandomCarver(seed=0), max_strokes=10)
    _, m2 = run_bot(sphere_spec, RandomCarver(seed=1), max_strokes=10)
    text = metrics_csv([("run-0", m1), ("run-1", m2)])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == list(METRICS_COLUMNS)
    assert len(rows) == 3
    assert rows[1][0] == "run-0"
    assert int(rows[1][4]) == 10
    assert float(rows[2][6]) == pytest.approx(m2.exposure, rel=1e-4)


def test_summary_json_aggregates(sphere_spec):
    _, m1 = run_bot(sphere_spec, RiskAverse(seed=0))
    _, m2 = run_bot(sphere_spec, RandomCarver(seed=0), max_strokes=10)
    text = summary_json([("risk", m1), ("random", m2)])
    assert text.endswith("\n")
    doc = json.loads(text)
    assert doc["runs"] == 2
    assert doc["completed"] == 1
    assert doc["total_strokes"] == m1.strokes + m2.strokes
    assert set(doc["per_run"]) == {"risk", "random"}
    assert doc["per_run"]["risk"]["completion"] is True
