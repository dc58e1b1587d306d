import numpy as np
import pytest
from fastapi.testclient import TestClient

from symptomnet import model, synthgen, workflow
from symptomnet.estimation import EssConfig, fit_bdeu
from symptomnet.graph import BayesNet
from symptomnet.inference import apply_do, query_conditions
from symptomnet.pipeline import fit_calibrator
from symptomnet.service import create_app


@pytest.fixture(scope="module")
def net():
    cohort = synthgen.sample_cohort(synthgen.GeneratorConfig(n=3000, seed=17))
    binner = workflow.fit_binner(cohort)
    train = workflow.training_table(workflow.discretize(cohort, binner))
    spec = model.assessment_network()
    return BayesNet(spec, fit_bdeu(spec, train, EssConfig(8000.0)))


@pytest.fixture(scope="module")
def calibrators():
    rng = np.random.default_rng(1)
    scores = rng.random(500)
    labels = (rng.random(500) < scores).astype(int)
    cal = fit_calibrator(scores, labels, seed=1)
    return {c: cal for c in model.CONDITIONS}


@pytest.fixture()
def client(net, calibrators):
    with TestClient(create_app(net=net, calibrators=calibrators)) as c:
        yield c


def new_session(client) -> str:
    resp = client.post("/sessions")
    assert resp.status_code == 201
    return resp.json()["session_id"]


SURROGATE = model.SURROGATES[0]


class TestBasics:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok", "calibrated": True}

    def test_network_structure(self, client, net):
        resp = client.get("/network")
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["nodes"]) == 48
        kinds = {n["name"]: n["kind"] for n in body["nodes"]}
        assert kinds["Depression"] == "condition"
        assert all(kinds[s] == "symptom" for s in model.SYMPTOMS)
        surro = next(n for n in body["nodes"] if n["kind"] == "surrogate")
        assert surro["symptom"] in model.SYMPTOMS
        assert len(body["edges"]) == len(net.spec.edges)

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope").status_code == 404
        assert client.get("/sessions/nope/posteriors").status_code == 404

    def test_session_lifecycle(self, client):
        sid = new_session(client)
        assert client.get(f"/sessions/{sid}").status_code == 200
        assert client.delete(f"/sessions/{sid}").status_code == 204
        assert client.get(f"/sessions/{sid}").status_code == 404


class TestEvidence:
    def test_set_and_clear(self, client):
        sid = new_session(client)
        resp = client.put(f"/sessions/{sid}/evidence", json={"set": {SURROGATE: 3}})
        assert resp.status_code == 200
        assert resp.json()["evidence"] == {SURROGATE: 3}
        resp = client.put(f"/sessions/{sid}/evidence", json={"clear": [SURROGATE]})
        assert resp.json()["evidence"] == {}

    def test_unknown_node_rejected_with_name(self, client):
        sid = new_session(client)
        resp = client.put(f"/sessions/{sid}/evidence", json={"set": {"bogus": 1}})
        assert resp.status_code == 400
        assert "bogus" in resp.json()["detail"]

    def test_out_of_range_state_rejected(self, client):
        sid = new_session(client)
        resp = client.put(f"/sessions/{sid}/evidence", json={"set": {SURROGATE: 4}})
        assert resp.status_code == 400

    def test_condition_evidence_rejected(self, client):
        sid = new_session(client)
        resp = client.put(f"/sessions/{sid}/evidence", json={"set": {"Depression": 1}})
        assert resp.status_code == 400

    def test_posterior_matches_library_query(self, client, net):
        sid = new_session(client)
        evidence = {SURROGATE: 3, model.SURROGATES[5]: 0}
        client.put(f"/sessions/{sid}/evidence", json={"set": evidence})
        body = client.get(f"/sessions/{sid}/posteriors").json()
        p_dep, p_anx = query_conditions(net, evidence)
        assert body["conditions"]["Depression"]["raw"] == pytest.approx(p_dep, abs=1e-12)
        assert body["conditions"]["Anxiety"]["raw"] == pytest.approx(p_anx, abs=1e-12)

    def test_symptom_evidence_point_mass(self, client):
        sid = new_session(client)
        symptom = model.SYMPTOMS[0]
        client.put(f"/sessions/{sid}/evidence", json={"set": {symptom: 2}})
        body = client.get(f"/sessions/{sid}/posteriors").json()
        assert body["symptoms"][symptom]["distribution"] == [0.0, 0.0, 1.0, 0.0]
        assert body["symptoms"][symptom]["expected_severity"] == 2.0


class TestInterventions:
    def test_isolation_matches_library_do(self, client, net):
        sid = new_session(client)
        evidence = {s: 3 for s in model.symptom_surrogates("Sleep")}
        client.put(f"/sessions/{sid}/evidence", json={"set": evidence})
        client.put(f"/sessions/{sid}/interventions", json={"add": ["Sleep"]})
        body = client.get(f"/sessions/{sid}/posteriors").json()
        done = apply_do(net, {"Sleep"})
        p_dep, p_anx = query_conditions(done, evidence)
        assert body["conditions"]["Depression"]["raw"] == pytest.approx(p_dep, abs=1e-12)
        assert body["conditions"]["Anxiety"]["raw"] == pytest.approx(p_anx, abs=1e-12)
        assert body["symptoms"]["Sleep"]["isolated"] is True

    def test_isolation_equals_dropping_its_evidence(self, client, net):
        sleep_surrogates = model.symptom_surrogates("Sleep")
        other = [s for s in model.SURROGATES if s not in sleep_surrogates][:3]
        evidence = {**{s: 3 for s in sleep_surrogates}, **{s: 1 for s in other}}

        sid = new_session(client)
        client.put(f"/sessions/{sid}/evidence", json={"set": evidence})
        client.put(f"/sessions/{sid}/interventions", json={"add": ["Sleep"]})
        isolated = client.get(f"/sessions/{sid}/posteriors").json()

        pruned = {k: v for k, v in evidence.items() if k not in sleep_surrogates}
        p_dep, _ = query_conditions(apply_do(net, {"Sleep"}), pruned)
        assert isolated["conditions"]["Depression"]["raw"] == pytest.approx(
            p_dep, abs=1e-12
        )

    def test_remove_restores_initial_state(self, client):
        sid = new_session(client)
        evidence = {SURROGATE: 3}
        client.put(f"/sessions/{sid}/evidence", json={"set": evidence})
        before = client.get(f"/sessions/{sid}/posteriors").json()
        symptom = model.SURROGATE_SYMPTOM[SURROGATE]
        client.put(f"/sessions/{sid}/interventions", json={"add": [symptom]})
        during = client.get(f"/sessions/{sid}/posteriors").json()
        assert during != before
        client.put(f"/sessions/{sid}/interventions", json={"remove": [symptom]})
        after = client.get(f"/sessions/{sid}/posteriors").json()
        assert after == before

    def test_unknown_intervention_node(self, client):
        sid = new_session(client)
        resp = client.put(f"/sessions/{sid}/interventions", json={"add": ["bogus"]})
        assert resp.status_code == 400


class TestHistoryAndCalibration:
    def test_history_records_condition_probabilities(self, client):
        sid = new_session(client)
        client.put(f"/sessions/{sid}/evidence", json={"set": {SURROGATE: 3}})
        client.put(f"/sessions/{sid}/interventions", json={"add": ["Sleep"]})
        history = client.get(f"/sessions/{sid}").json()["history"]
        assert len(history) == 2
        assert history[0]["action"]["type"] == "evidence"
        assert history[1]["action"]["type"] == "interventions"
        for entry in history:
            for c in model.CONDITIONS:
                assert 0.0 <= entry["conditions"][c]["raw"] <= 1.0

    def test_replay_reproduces_state(self, client):
        sid = new_session(client)
        client.put(f"/sessions/{sid}/evidence", json={"set": {SURROGATE: 2}})
        client.put(f"/sessions/{sid}/interventions", json={"add": ["Sleep"]})
        client.put(f"/sessions/{sid}/evidence", json={"set": {model.SURROGATES[4]: 1}})
        original = client.get(f"/sessions/{sid}/posteriors").json()
        history = client.get(f"/sessions/{sid}").json()["history"]

        sid2 = new_session(client)
        for entry in history:
            action = entry["action"]
            if action["type"] == "evidence":
                client.put(
                    f"/sessions/{sid2}/evidence",
                    json={"set": action["set"], "clear": action["clear"]},
                )
            else:
                client.put(
                    f"/sessions/{sid2}/interventions",
                    json={"add": action["add"], "remove": action["remove"]},
                )
        replayed = client.get(f"/sessions/{sid2}/posteriors").json()
        original["session_id"] = replayed["session_id"]
        assert replayed == original

    def test_calibrated_present_and_in_range(self, client):
        sid = new_session(client)
        client.put(f"/sessions/{sid}/evidence", json={"set": {SURROGATE: 3}})
        body = client.get(f"/sessions/{sid}/posteriors").json()
        for c in model.CONDITIONS:
            cal = body["conditions"][c]["calibrated"]
            assert cal is not None and 0.0 <= cal <= 1.0

    def test_uncalibrated_app_returns_null(self, net):
        with TestClient(create_app(net=net)) as c:
            sid = new_session(c)
            c.put(f"/sessions/{sid}/evidence", json={"set": {SURROGATE: 3}})
            body = c.get(f"/sessions/{sid}/posteriors").json()
            assert body["conditions"]["Depression"]["calibrated"] is None
