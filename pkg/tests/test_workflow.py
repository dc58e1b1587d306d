import numpy as np
import pytest

from symptomnet import model, synthgen, workflow
from symptomnet.data import DataError
from symptomnet.estimation import EssConfig, fit_bdeu
from symptomnet.graph import BayesNet
from symptomnet.inference import (
    InconsistentEvidenceError,
    eliminate_variables,
)
from symptomnet.pipeline import apply_bins, condition_target, fit_calibrator
from tests.conftest import make_net, random_network


@pytest.fixture(scope="module")
def cohort():
    return synthgen.sample_cohort(synthgen.GeneratorConfig(n=3000, seed=21))


@pytest.fixture(scope="module")
def fitted(cohort):
    binner = workflow.fit_binner(cohort)
    train = workflow.training_table(workflow.discretize(cohort, binner))
    spec = model.assessment_network()
    return BayesNet(spec, fit_bdeu(spec, train, EssConfig(8000.0))), binner


class TestDiscretize:
    def test_adds_quartile_columns(self, cohort):
        binner = workflow.fit_binner(cohort)
        out = workflow.discretize(cohort, binner)
        for node in model.SURROGATES:
            assert node in out.discrete
            assert out.domains[node] == model.SEVERITY_STATES
            assert set(np.unique(out.discrete[node])) <= {0, 1, 2, 3}

    def test_matches_scalar_binning(self, cohort):
        binner = workflow.fit_binner(cohort)
        out = workflow.discretize(cohort, binner)
        node = model.SURROGATES[0]
        scores = cohort.continuous[workflow.score_column(node)][:200]
        expected = [apply_bins(float(v), binner.boundaries[node]) for v in scores]
        assert np.array_equal(out.discrete[node][:200], expected)

    def test_missing_score_column(self, cohort):
        from symptomnet.data import DatasetTable

        bad = DatasetTable(
            domains={"diagnosis": ("no", "yes")},
            discrete={"diagnosis": np.zeros(10, dtype=np.int64)},
        )
        with pytest.raises(DataError):
            workflow.fit_binner(bad)

    def test_training_table_exactly_network_columns(self, cohort):
        binner = workflow.fit_binner(cohort)
        train = workflow.training_table(workflow.discretize(cohort, binner))
        assert set(train.discrete) == set(model.assessment_network().node_names())
        assert train.n_rows == cohort.n_rows


class TestBatchMarginals:
    def test_matches_per_record_elimination(self):
        rng = np.random.default_rng(30)
        for _ in range(20):
            net = random_network(rng)
            names = net.spec.node_names()
            if len(names) < 3:
                continue
            observed = list(names[: len(names) // 2])
            query = [n for n in names if n not in observed]
            n = 15
            cols = {
                v: rng.integers(0, net.cardinality(v), n) for v in observed
            }
            batch = workflow.batch_marginals(net, cols, query)
            for i in range(n):
                evidence = {v: int(cols[v][i]) for v in observed}
                try:
                    single = eliminate_variables(net, set(query), evidence)
                except InconsistentEvidenceError:
                    continue
                for q in query:
                    assert np.allclose(batch[q][i], single[q], atol=1e-9)

    def test_inconsistent_record_raises(self):
        net = make_net(
            {"A": 2, "B": 2},
            [("A", "B")],
            {"A": [1.0, 0.0], "B": [[1.0, 0.5], [0.0, 0.5]]},
        )
        with pytest.raises(InconsistentEvidenceError):
            workflow.batch_marginals(net, {"B": np.array([1])}, ["A"])

    def test_requires_evidence(self, fitted):
        net, _ = fitted
        with pytest.raises(DataError):
            workflow.batch_marginals(net, {}, ["Depression"])

    def test_rows_normalized(self, fitted, cohort):
        net, binner = fitted
        table = workflow.discretize(cohort, binner)
        scores = workflow.condition_scores(net, table)
        for c in model.CONDITIONS:
            assert scores[c].shape == (cohort.n_rows,)
            assert np.all((scores[c] >= 0) & (scores[c] <= 1))


class TestConditionLabels:
    def test_matches_scalar_rule(self, cohort):
        from symptomnet.pipeline import ABSENT, PRESENT, UNDEFINED

        code = {PRESENT: 1, ABSENT: 0, UNDEFINED: -1}
        for condition, total_col in (
            (model.DEPRESSION, "phq8_total"),
            (model.ANXIETY, "gad7_total"),
        ):
            labels = workflow.condition_labels(cohort, condition)
            totals = cohort.continuous[total_col]
            diagnosis = cohort.discrete["diagnosis"]
            for i in range(400):
                expected = code[condition_target(int(totals[i]), bool(diagnosis[i]))]
                assert labels[i] == expected

    def test_all_three_classes_occur(self, cohort):
        labels = workflow.condition_labels(cohort, model.DEPRESSION)
        assert set(np.unique(labels)) == {-1, 0, 1}


class TestEvaluationReport:
    def test_schema_and_sanity(self, fitted, cohort):
        net, binner = fitted
        table = workflow.discretize(cohort, binner)
        scores = workflow.condition_scores(net, table)
        calibrators = {}
        for c in model.CONDITIONS:
            labels = workflow.condition_labels(table, c)
            mask = labels >= 0
            calibrators[c] = fit_calibrator(scores[c][mask], labels[mask], seed=1)
        report = workflow.evaluation_report(
            net, table, calibrators, group_columns=("sex",)
        )
        for c in model.CONDITIONS:
            entry = report["conditions"][c]
            assert entry["n"] > 0
            assert 0.6 < entry["roc_auc"] <= 1.0
            assert abs(entry["roc_auc_calibrated"] - entry["roc_auc"]) < 0.01
            assert 0.0 <= entry["ece_calibrated"] <= 1.0
            assert set(entry["prevalence_metrics"]) == {"ppv", "npv", "lr_plus", "lr_minus"}
            assert "sex" in entry["fairness"]
        for symptom in model.SYMPTOMS:
            entry = report["symptoms"][symptom]
            assert 0.5 < entry["roc_auc"] <= 1.0
            assert set(entry["surrogate_roc_auc"]) == set(
                model.symptom_surrogates(symptom)
            )

    def test_family_restriction_uses_fewer_columns(self, fitted, cohort):
        net, binner = fitted
        table = workflow.discretize(cohort, binner)
        family = model.SURROGATE_FAMILY[model.SURROGATES[0]]
        cols = workflow.surrogate_evidence_columns(table, families=(family,))
        assert 0 < len(cols) < len(model.SURROGATES)
        assert all(model.SURROGATE_FAMILY[n] == family for n in cols)
        scores = workflow.condition_scores(net, table, families=(family,))
        full = workflow.condition_scores(net, table)
        assert not np.allclose(scores[model.DEPRESSION], full[model.DEPRESSION])
