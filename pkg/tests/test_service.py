import json

import pytest
from fastapi.testclient import TestClient

from humankernel.experiments.occam import build_occam_task
from humankernel.experiments.stimuli import make_sawtooth
from humankernel.service import StudyStore, create_app
from humankernel.service.app import shuffle_for
from humankernel.service.store import task_from_dict, task_to_dict

STUDY_SEED = 42


@pytest.fixture()
def store(tmp_path):
    st = StudyStore(tmp_path / "store")
    st.add_stimulus(make_sawtooth(2.0, 1.0, n_test=10, stimulus_id="st-1"))
    st.add_task(build_occam_task(seed=5, restarts=2))
    return st


@pytest.fixture()
def client(store):
    return TestClient(create_app(store, study_seed=STUDY_SEED))


def post_response(client, pid="p1", n=10, **over):
    body = {"participant_id": pid, "stimulus_id": "st-1",
            "y_star": [0.1] * n, "response_time_s": 75.0}
    body.update(over)
    return client.post("/api/responses", json=body)


def test_health(client):
    assert client.get("/api/health").json() == {"status": "ok"}


def test_study_flow_until_done(client, store):
    task_id = next(iter(store.tasks))
    assert client.get("/api/study/p1/next").json() == {
        "done": False, "kind": "stimulus", "id": "st-1"}
    assert post_response(client).status_code == 200
    assert client.get("/api/study/p1/next").json() == {
        "done": False, "kind": "task", "id": task_id}
    oc = client.get(f"/api/occam/{task_id}",
                    params={"participant_id": "p1"}).json()
    r = client.post("/api/rankings", json={
        "participant_id": "p1", "task_id": task_id,
        "shuffle_token": oc["shuffle_token"],
        "order": [1, 2, 3, 4, 5, 6, 7]})
    assert r.status_code == 200
    assert client.get("/api/study/p1/next").json() == {"done": True}
    # another participant still sees the full study
    assert client.get("/api/study/p2/next").json()["done"] is False


def test_stimulus_fetch_and_404(client):
    stim = client.get("/api/stimuli/st-1").json()
    assert len(stim["X_test"]) == 10 and stim["family"] == "sawtooth"
    assert client.get("/api/stimuli/nope").status_code == 404


def test_response_validation_errors(client):
    bad_len = post_response(client, n=9)
    assert bad_len.status_code == 400
    assert "y_star" in bad_len.json()["detail"]
    assert post_response(client, stimulus_id="ghost").status_code == 404
    bad_rt = post_response(client, response_time_s=0.0)
    assert bad_rt.status_code == 422  # schema-level validation


def test_occam_presentation_is_stable_and_participant_specific(client, store):
    task_id = next(iter(store.tasks))
    a1 = client.get(f"/api/occam/{task_id}",
                    params={"participant_id": "a"}).json()
    a2 = client.get(f"/api/occam/{task_id}",
                    params={"participant_id": "a"}).json()
    assert a1 == a2  # reload-stable
    b = client.get(f"/api/occam/{task_id}",
                   params={"participant_id": "b"}).json()
    assert a1["shuffle_token"] != b["shuffle_token"]
    assert len(a1["curves"]) == 7


def test_ranking_deshuffle_invariance(client, store):
    """The same semantic ranking submitted under two different shuffles
    stores identical internal orders."""
    task_id = next(iter(store.tasks))
    semantic = [4, 1, 2, 3, 5, 7, 6]  # internal labels, best first

    def submit(pid):
        perm, token = shuffle_for(pid, task_id, STUDY_SEED)
        pos_of = {lab: i + 1 for i, lab in enumerate(perm)}
        r = client.post("/api/rankings", json={
            "participant_id": pid, "task_id": task_id,
            "shuffle_token": token,
            "order": [pos_of[lab] for lab in semantic]})
        assert r.status_code == 200
        return r.json()["order"]

    assert submit("alice") == semantic
    assert submit("bob") == semantic


def test_ranking_error_codes(client, store):
    task_id = next(iter(store.tasks))
    _, token = shuffle_for("p", task_id, STUDY_SEED)
    base = {"participant_id": "p", "task_id": task_id,
            "shuffle_token": token, "order": [1, 2, 3, 4, 5, 6, 7]}
    assert client.post("/api/rankings",
                       json={**base, "task_id": "ghost"}).status_code == 404
    assert client.post("/api/rankings",
                       json={**base, "shuffle_token": "bad"}).status_code == 409
    assert client.post("/api/rankings",
                       json={**base, "order": [1] * 7}).status_code == 400


def test_export_round_trip(client):
    post_response(client, y_star=[float(i) for i in range(10)])
    dump = client.get("/api/export/responses").text
    lines = [json.loads(x) for x in dump.strip().split("\n")]
    assert lines[-1]["y_star"] == [float(i) for i in range(10)]


def test_store_survives_reload_and_partial_tail(store, tmp_path):
    client = TestClient(create_app(store, study_seed=STUDY_SEED))
    post_response(client)
    # simulate a torn append
    with open(store.responses_path, "a") as fh:
        fh.write('{"participant_id": "x", "stim')
    reloaded = StudyStore(store.root)
    assert len(reloaded.responses) == 1
    assert reloaded.responses[0].participant_id == "p1"
    assert set(reloaded.stimuli) == {"st-1"}


def test_store_referential_checks(store):
    from humankernel.responses import RankingRecord, ResponseRecord
    with pytest.raises(KeyError):
        store.append_response(ResponseRecord(
            participant_id="p", stimulus_id="ghost", y_star=(1.0,),
            response_time_s=1.0, submitted_at=0.0))
    with pytest.raises(KeyError):
        store.append_ranking(RankingRecord(
            participant_id="p", task_id="ghost",
            order=(1, 2, 3, 4, 5, 6, 7)))
    with pytest.raises(ValueError):
        store.add_stimulus(make_sawtooth(2.0, 1.0, n_test=10,
                                         stimulus_id="st-1"))


def test_task_serialization_roundtrip():
    task = build_occam_task(seed=9, restarts=2)
    assert task_from_dict(task_to_dict(task)) == task
