from __future__ import annotations

import numpy as np
import pytest

from motifrep.evaluate import evaluate_variant, matching_rate, write_report
from motifrep.generate import generate_one
from motifrep.model import ModelConfig, ModelState
from motifrep.rules import RepetitionType
from motifrep.vocab import tokenize

from conftest import make_motif

STR, TRR = RepetitionType.STRICT, RepetitionType.TRANSPOSITIONAL


@pytest.fixture(scope="module")
def tiny_model():
    cfg = ModelConfig(layers=1, heads=2, hidden=16, feed_forward=32,
                      embedding_sizes=(4, 4, 4, 4, 8, 4, 4), label_embedding=4, seed=1)
    return ModelState.fresh(cfg, "RR")


@pytest.fixture(scope="module")
def motifs():
    rng = np.random.default_rng(7)
    out = []
    for _ in range(20):
        n = int(rng.integers(2, 7))
        pitches = rng.integers(40, 90, size=n).tolist()
        out.append(tokenize(make_motif(pitches, slots=list(range(n)))))
    return out


class TestMatchingRate:
    def test_definition_arithmetic(self, tiny_model, motifs):
        # 15 rule-exact matches + 5 deliberate mismatches = 0.75
        good = [(tm, generate_one(tm, STR, model=tiny_model), STR) for tm in motifs[:15]]
        bad = [(tm, generate_one(tm, TRR, model=tiny_model, t=-2), STR) for tm in motifs[15:]]
        assert matching_rate(good + bad) == pytest.approx(0.75)

    def test_rule_based_str_is_always_one(self, tiny_model, motifs):
        pairs = [(tm, generate_one(tm, STR, model=tiny_model), STR) for tm in motifs]
        assert matching_rate(pairs) == 1.0

    def test_zero_matches(self, tiny_model, motifs):
        pairs = [(tm, generate_one(tm, TRR, model=tiny_model, t=-2), STR) for tm in motifs]
        assert matching_rate(pairs) == 0.0

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            matching_rate([])


class TestEvaluateVariant:
    def test_rr_scores_exactly_one_on_rule_labels(self, tiny_model, motifs):
        report = evaluate_variant("RR", tiny_model, motifs)
        assert report.rates["StR"] == 1.0 and report.stds["StR"] == 0.0
        assert report.rates["TrR"] == 1.0 and report.stds["TrR"] == 0.0

    def test_report_bounds_and_counts(self, tiny_model, motifs):
        report = evaluate_variant("V", tiny_model, motifs)
        for label, rate in report.rates.items():
            assert 0.0 <= rate <= 1.0
            assert report.stds[label] >= 0.0
            assert report.counts[label] == len(motifs)

    def test_deterministic(self, tiny_model, motifs):
        r1 = evaluate_variant("RR", tiny_model, motifs, seed=3)
        r2 = evaluate_variant("RR", tiny_model, motifs, seed=3)
        assert r1.rates == r2.rates and r1.stds == r2.stds

    def test_missing_model_rejected(self, motifs):
        with pytest.raises(ValueError, match="model"):
            evaluate_variant("RR", None, motifs)

    def test_unknown_variant_rejected(self, tiny_model, motifs):
        with pytest.raises(ValueError, match="variant"):
            evaluate_variant("XX", tiny_model, motifs)

    def test_json_and_table_output(self, tiny_model, motifs, tmp_path):
        report = evaluate_variant("RR", tiny_model, motifs)
        write_report(report, tmp_path / "report.json")
        import json

        d = json.loads((tmp_path / "report.json").read_text())
        assert d["matching_rate"]["StR"] == 1.0
        text = report.table()
        assert "StR" in text and "R-Transformer-RR" in text
