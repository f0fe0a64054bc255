import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from humankernel import responses as resp


def make_stimulus(n_test=4, stimulus_id="s1"):
    return resp.Stimulus(
        id=stimulus_id, X_train=(0.0, 1.0, 2.0), y_train=(0.1, 0.4, 0.2),
        X_test=tuple(3.0 + i for i in range(n_test)), family="gp-sample")


def make_response(pid, y, t=100.0, rt=80.0, sid="s1"):
    return resp.ResponseRecord(participant_id=pid, stimulus_id=sid,
                               y_star=tuple(y), response_time_s=rt,
                               submitted_at=t)


# --- record validation -------------------------------------------------------

def test_stimulus_grid_validation():
    with pytest.raises(ValueError):
        resp.Stimulus(id="x", X_train=(0.0, 0.0), y_train=(1.0, 1.0),
                      X_test=(2.0,))
    with pytest.raises(ValueError):
        resp.Stimulus(id="x", X_train=(0.0, 1.0), y_train=(1.0, 1.0),
                      X_test=(1.0, 2.0))


def test_response_validation():
    with pytest.raises(ValueError):
        make_response("p", [0.0, float("inf")])
    with pytest.raises(ValueError):
        make_response("p", [0.0], rt=0.0)


def test_ranking_validation():
    with pytest.raises(ValueError):
        resp.RankingRecord(participant_id="p", task_id="t",
                           order=(1, 2, 3, 4, 5, 6, 6))
    with pytest.raises(ValueError):
        resp.RankingRecord(participant_id="p", task_id="t",
                           order=(1, 2, 3, 4, 5, 6, 7),
                           plausibility_answer="maybe")


# --- to_drawset ---------------------------------------------------------------

def test_to_drawset_stacks_and_orders():
    stim = make_stimulus()
    records = [make_response("b", [1, 1, 1, 1], t=5.0),
               make_response("a", [2, 2, 2, 2], t=9.0)]
    draws, warnings = resp.to_drawset(stim, records)
    assert draws.Y_test.shape == (4, 2)
    # ordered by participant_id
    assert np.allclose(draws.Y_test[:, 0], 2.0)
    assert warnings == []


def test_to_drawset_latest_wins_on_duplicates():
    stim = make_stimulus()
    records = [make_response("a", [1, 1, 1, 1], t=5.0),
               make_response("a", [3, 3, 3, 3], t=9.0)]
    draws, warnings = resp.to_drawset(stim, records)
    assert draws.Y_test.shape == (4, 1)
    assert np.allclose(draws.Y_test[:, 0], 3.0)
    assert len(warnings) == 1 and "a" in warnings[0]


def test_to_drawset_rejects_wrong_length():
    stim = make_stimulus()
    with pytest.raises(ValueError, match="bob"):
        resp.to_drawset(stim, [make_response("bob", [1.0, 2.0])])


# --- total variation / filter -------------------------------------------------

def test_total_variation_oracle():
    assert resp.total_variation([0.0, 2.0, 1.0, 1.0]) == pytest.approx(3.0)
    assert resp.total_variation([5.0]) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=2, max_size=12),
       st.floats(-10, 10), st.floats(0.1, 5.0))
def test_total_variation_shift_and_scale(ys, shift, scale):
    tv = resp.total_variation(ys)
    shifted = resp.total_variation([y + shift for y in ys])
    scaled = resp.total_variation([y * scale for y in ys])
    assert shifted == pytest.approx(tv, rel=1e-9, abs=1e-9)
    assert scaled == pytest.approx(tv * scale, rel=1e-9, abs=1e-9)


def test_filter_bounds_inclusive():
    flat = [0.0, 0.0, 0.0, 0.0]
    recs = [make_response("a", flat, rt=50.0),
            make_response("b", flat, rt=200.0),
            make_response("c", flat, rt=49.9),
            make_response("d", flat, rt=200.1),
            make_response("e", [0, 4, 0, 0], rt=100.0)]  # tv = 8 > 3
    passed, failed = resp.filter_responses(recs)
    assert [r.participant_id for r in passed] == ["a", "b"]
    assert [r.participant_id for r in failed] == ["c", "d", "e"]


def test_filter_tv_boundary():
    recs = [make_response("a", [0.0, 3.0, 3.0, 3.0], rt=100.0)]
    passed, _ = resp.filter_responses(recs)  # tv exactly 3 passes
    assert len(passed) == 1


# --- clustering ---------------------------------------------------------------

def test_cluster_separated_blobs():
    lo = [make_response(f"l{i}", [0.0 + 0.01 * i] * 4) for i in range(4)]
    hi = [make_response(f"h{i}", [10.0 + 0.01 * i] * 4) for i in range(3)]
    labels = resp.agglomerative_cluster(lo + hi, 2)
    assert labels == [0, 0, 0, 0, 1, 1, 1]


def test_cluster_k_equals_n_and_1():
    recs = [make_response(f"p{i}", [float(i)] * 4) for i in range(3)]
    assert resp.agglomerative_cluster(recs, 3) == [0, 1, 2]
    assert resp.agglomerative_cluster(recs, 1) == [0, 0, 0]
    with pytest.raises(ValueError):
        resp.agglomerative_cluster(recs, 4)


def test_cluster_is_deterministic_under_ties():
    # four equidistant points on a line: ties broken by smallest indices
    recs = [make_response(f"p{i}", [float(i), 0.0, 0.0, 0.0])
            for i in range(4)]
    a = resp.agglomerative_cluster(recs, 2)
    b = resp.agglomerative_cluster(list(recs), 2)
    assert a == b


# --- persistence ---------------------------------------------------------------

def test_jsonl_roundtrip(tmp_path):
    stim = make_stimulus()
    recs = [make_response("a", [1, 2, 3, 4]), make_response("b", [0, 0, 0, 0])]
    ranks = [resp.RankingRecord(participant_id="a", task_id="t",
                                order=(2, 1, 3, 4, 5, 6, 7),
                                plausibility_answer="likely",
                                submitted_at=1.0)]
    resp.save_stimuli(tmp_path / "s.jsonl", [stim])
    resp.save_responses(tmp_path / "r.jsonl", recs)
    resp.save_rankings(tmp_path / "k.jsonl", ranks)
    assert resp.load_stimuli(tmp_path / "s.jsonl") == [stim]
    assert resp.load_responses(tmp_path / "r.jsonl") == recs
    assert resp.load_rankings(tmp_path / "k.jsonl") == ranks


def test_jsonl_malformed_line_reports_position(tmp_path):
    path = tmp_path / "r.jsonl"
    good = json.dumps({"participant_id": "a", "stimulus_id": "s",
                       "y_star": [1.0], "response_time_s": 2.0,
                       "submitted_at": 0.0})
    path.write_text(good + "\n{broken\n" + good + "\n")
    with pytest.raises(ValueError, match="line 2"):
        resp.load_responses(path)


def test_jsonl_partial_tail_tolerated_only_at_end(tmp_path):
    path = tmp_path / "r.jsonl"
    good = json.dumps({"participant_id": "a", "stimulus_id": "s",
                       "y_star": [1.0], "response_time_s": 2.0,
                       "submitted_at": 0.0})
    path.write_text(good + "\n" + good[: len(good) // 2])
    loaded = resp.load_responses(path, allow_partial_tail=True)
    assert len(loaded) == 1
    with pytest.raises(ValueError):
        resp.load_responses(path)


def test_export_responses_csv(tmp_path):
    stim = make_stimulus(n_test=2)
    recs = [make_response("a", [1.5, 2.5])]
    path = tmp_path / "out.csv"
    resp.export_responses_csv(path, [stim], recs)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "participant_id,stimulus_id,x,y,response_time_s"
    assert lines[1].startswith("a,s1,3,1.5")
    assert len(lines) == 3
