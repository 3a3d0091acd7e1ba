import json
import os
from pathlib import Path

import numpy as np
import pytest

import plansum

DATA = Path(os.environ.get("PLANSUM_TEST_DATA", Path(__file__).resolve().parents[1] / "data"))


def test_segment_and_tokenize():
    assert plansum.segment_sentences("The U.S. Court ruled. It was final.") == [
        "The U.S. Court ruled.",
        "It was final.",
    ]
    assert plansum.tokenize("The Court", True) == ["the", "court"]


def test_rouge_identity_and_disjoint():
    same = plansum.rouge("the court ruled", "the court ruled")
    assert same["rouge1"]["f1"] == pytest.approx(1.0)
    assert same["rougeL"]["f1"] == pytest.approx(1.0)
    assert plansum.rouge("alpha", "beta")["rouge2"]["f1"] == 0.0


def test_oracle_labels_pick_matching_sentence():
    selected, score = plansum.oracle_labels(
        ["the weather was mild", "the court granted the motion", "lunch was served"],
        "the court granted the motion",
    )
    assert selected == [1]
    assert score == pytest.approx(1.0)


def test_plan_round_trip_and_parse_error():
    tuples = [("court", "granted", "motion - to dismiss", 0), ("city", "appealed", "ruling", 1)]
    text = plansum.linearize_plan(tuples, True)
    assert plansum.parse_plan(text) == tuples
    with pytest.raises(plansum.ParseError):
        plansum.parse_plan("a - b -c")
    assert issubclass(plansum.ParseError, plansum.Error)


def test_extract_plan_from_conllu_fixture():
    text = (DATA / "svo_fixture.conllu").read_text()
    tuples = plansum.extract_plan(text, normalize=True)
    assert ("lawsuit", "resolved", "consent decree") in [t[:3] for t in tuples]
    assert "Title VII" in plansum.entity_plan(text)


def test_realize_controllability_fixture():
    fx = json.loads((DATA / "controllability.json").read_text())
    plan = plansum.parse_plan(fx["plan"])
    sentences, provenance = plansum.realize(fx["selection"], plan)
    assert provenance == fx["expected_order"]
    assert sentences == [fx["selection"][i] for i in provenance]


def test_knn_matches_brute_force():
    rng = np.random.default_rng(0)
    keys = rng.standard_normal((500, 16)).astype(np.float32)
    query = rng.standard_normal(16).astype(np.float32)
    ids = list(range(1000, 1500))
    got = [i for i, _ in plansum.knn_topk(keys, ids, query, 10)]
    scores = keys.astype(np.float64) @ query.astype(np.float64)
    want = [ids[i] for i in np.argsort(-scores, kind="stable")[:10]]
    assert got == want


def test_synth_and_pipeline(tmp_path):
    salient = plansum.synth(str(tmp_path / "data"), docs=4, sentences=8, salient=2, vocab=40, dim=8, seed=3)
    assert len(salient) == 4 and all(len(s) == 2 for s in salient)
    config = {
        "corpus": str(tmp_path / "data" / "corpus.jsonl"),
        "output_dir": str(tmp_path / "out"),
        "selection": "oracle",
        "seed": 9,
    }
    report = plansum.run_pipeline(config)
    assert report["summary"]["count"] == 4
    assert 0.0 < report["summary"]["mean"]["rouge1"]["f1"] <= 1.0
    assert (tmp_path / "out" / "report.json").exists()
    with pytest.raises(plansum.Error):
        plansum.run_pipeline({"corpus": config["corpus"], "output_dir": str(tmp_path / "x"), "selection": "oracle"})
