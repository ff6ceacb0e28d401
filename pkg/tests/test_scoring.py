import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phonoprint import (
    Config,
    DiagonalGmm,
    PhonemeModel,
    PhonemeScore,
    PreconditionError,
    SpeakerProfile,
    UtteranceFeatures,
    broad_class,
    explain,
    normalize_score,
    score_utterance,
    tiered_phoneme_score,
)
from phonoprint.profiling import ClassModel
from phonoprint.scoring import anomaly_report_to_json, write_anomaly_csv

CFG = Config()


def gauss(mean, var=1.0):
    mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
    return DiagonalGmm(
        weights=np.array([1.0]),
        means=mean[None, :],
        variances=np.full((1, len(mean)), var),
    )


def phoneme_model(label, mean_ll, config=CFG, mean=(0.0, 0.0)):
    return PhonemeModel(
        phoneme_label=label,
        model=gauss(np.asarray(mean)),
        sample_count=10,
        mean_log_likelihood=mean_ll,
        reliability_weight=math.exp(mean_ll / config.weight_scale),
    )


def make_profile(models, salient, class_models=(), speaker_model=None, config=CFG, dim=2):
    return SpeakerProfile(
        speaker_id="spk",
        phoneme_models={m.phoneme_label: m for m in models},
        salient_phonemes=tuple(salient),
        class_models={c.class_label: c for c in class_models},
        speaker_model=speaker_model,
        config=config,
        embedding_dim=dim,
        speaker_embedding_dim=None if speaker_model is None else speaker_model.dim,
    )


def make_utterance(intervals_and_vectors, dim=2, emb=None, uid="t1"):
    frames = np.asarray([v for _, v in intervals_and_vectors], dtype=np.float64)
    if frames.size == 0:
        frames = np.zeros((1, dim))
    intervals = tuple((p, i, i) for i, (p, _) in enumerate(intervals_and_vectors))
    return UtteranceFeatures(
        utterance_id=uid,
        speaker_id="spk",
        label="unknown",
        frames=frames,
        frame_rate_hz=50.0,
        phoneme_intervals=intervals,
        speaker_embedding=emb,
    )


class TestBroadClass:
    @pytest.mark.parametrize(
        "symbol,expected",
        [
            ("a", "vowel"),
            ("p", "plosive"),
            ("s", "fricative"),
            ("m", "nasal"),
            ("l", "approximant"),
            ("tʃ", "affricate"),
            ("☃", "other"),
            ("ˈaː", "vowel"),
            ("", "other"),
        ],
    )
    def test_mapping(self, symbol, expected):
        assert broad_class(symbol) == expected

    def test_total_over_arbitrary_strings(self):
        for s in ("qq123", "!!", "\x00", "phoneme-with-dashes"):
            assert broad_class(s) in ("vowel", "plosive", "fricative", "nasal", "approximant", "affricate", "other")


class TestNormalizeScore:
    def test_center(self):
        assert normalize_score(-2000.0, CFG) == pytest.approx(0.5, abs=1e-12)

    def test_one_scale_above(self):
        # 1 / (1 + e^-1)
        assert normalize_score(-1800.0, CFG) == pytest.approx(0.7310585786300049, abs=1e-6)

    def test_one_scale_below(self):
        # 1 / (1 + e^1)
        assert normalize_score(-2200.0, CFG) == pytest.approx(0.2689414213699951, abs=1e-6)

    def test_matches_formula_exactly(self):
        for ll in (-3000.0, -2000.0, -1234.5, 0.0, 50.0):
            z = (ll - CFG.sigmoid_center) / CFG.sigmoid_scale
            assert normalize_score(ll, CFG) == pytest.approx(1.0 / (1.0 + math.exp(-z)), rel=1e-12)

    @given(st.floats(min_value=-5000, max_value=1000), st.floats(min_value=1e-3, max_value=1e4))
    def test_strictly_increasing(self, ll, delta):
        assert normalize_score(ll + delta, CFG) > normalize_score(ll, CFG)

    def test_non_finite_rejected(self):
        with pytest.raises(PreconditionError):
            normalize_score(float("nan"), CFG)


class TestTieredScore:
    def test_weighted_average_matches_hand_value(self):
        # weights 2 and 1 (mean_ll = 100 ln 2 and 0 at weight_scale 100),
        # scores 0.9 and 0.1: (2*0.9 + 1*0.1) / 3
        profile = make_profile(
            [phoneme_model("a", 100.0 * math.log(2.0)), phoneme_model("b", 0.0)],
            salient=("a", "b"),
        )
        scores = [
            PhonemeScore("a", (0, 0), -1.0, 0.9, "salient"),
            PhonemeScore("b", (1, 1), -1.0, 0.1, "salient"),
        ]
        tier, s = tiered_phoneme_score(profile, scores)
        assert tier == "salient"
        assert s == pytest.approx(0.6333333333333333, rel=1e-9)

    def test_generic_single_instance(self):
        profile = make_profile([phoneme_model("x", 0.0)], salient=())
        scores = [PhonemeScore("x", (0, 0), -1.0, 0.4, "generic")]
        tier, s = tiered_phoneme_score(profile, scores)
        assert (tier, s) == ("generic", pytest.approx(0.4))

    def test_class_single_instance(self):
        profile = make_profile([], salient=())
        scores = [PhonemeScore("a", (0, 0), -1.0, 0.7, "class")]
        tier, s = tiered_phoneme_score(profile, scores)
        assert (tier, s) == ("class", pytest.approx(0.7))

    def test_speaker_only_when_nothing_matches(self):
        profile = make_profile([], salient=())
        scores = [PhonemeScore("q", (0, 0), None, None, "unmatched")]
        assert tiered_phoneme_score(profile, scores) == ("speaker_only", None)

    def test_salient_tier_priority(self):
        # one salient instance forces tier salient no matter what else exists
        profile = make_profile(
            [phoneme_model("a", 1.0), phoneme_model("b", 0.0)], salient=("a",)
        )
        scores = [
            PhonemeScore("b", (0, 0), -1.0, 0.2, "generic"),
            PhonemeScore("a", (1, 1), -1.0, 0.8, "salient"),
            PhonemeScore("zz", (2, 2), None, None, "unmatched"),
        ]
        tier, s = tiered_phoneme_score(profile, scores)
        assert tier == "salient"
        assert s == pytest.approx(0.8)

    def test_weighted_average_underflow_safe(self):
        config = Config(weight_scale=10.0)
        profile = make_profile(
            [phoneme_model("a", -4000.0, config), phoneme_model("b", -4100.0, config)],
            salient=("a", "b"),
            config=config,
        )
        scores = [
            PhonemeScore("a", (0, 0), -1.0, 0.9, "salient"),
            PhonemeScore("b", (1, 1), -1.0, 0.1, "salient"),
        ]
        tier, s = tiered_phoneme_score(profile, scores)
        assert tier == "salient"
        # exp(-4000/10) underflows, the shifted form must not
        w_rel = math.exp(-100.0 / 10.0)
        assert s == pytest.approx((0.9 + w_rel * 0.1) / (1.0 + w_rel), rel=1e-9)


class TestScoreUtterance:
    def _profile_with_everything(self):
        near_origin = gauss([0.0, 0.0], 0.1)
        models = [
            PhonemeModel("a", near_origin, 10, -1.0, math.exp(-0.01)),
            PhonemeModel("x", near_origin, 10, -2.0, math.exp(-0.02)),
        ]
        class_models = [ClassModel("fricative", near_origin, 20, -1.5)]
        speaker_model = gauss([0.0, 0.0, 0.0], 1.0)
        return make_profile(models, salient=("a",), class_models=class_models, speaker_model=speaker_model)

    def test_matched_levels(self):
        profile = self._profile_with_everything()
        u = make_utterance([
            ("a", [0.0, 0.0]),   # salient
            ("x", [0.0, 0.0]),   # generic
            ("s", [0.0, 0.0]),   # class (fricative model exists)
            ("☃", [0.0, 0.0]),  # unmatched (class "other" has no model)
        ])
        report = score_utterance(profile, u)
        assert [s.matched_level for s in report.phoneme_scores] == ["salient", "generic", "class", "unmatched"]
        assert report.tier_used == "salient"
        assert report.phoneme_scores[3].normalized_score is None

    def test_fusion_endpoint(self):
        # S_phn=1, S_spk=0 is not reachable with finite likelihoods, so check
        # the interpolation identity instead on a real report.
        profile = self._profile_with_everything()
        u = make_utterance([("a", [0.0, 0.0])], emb=np.array([0.0, 0.0, 0.0]))
        report = score_utterance(profile, u)
        expected = CFG.fusion_alpha * report.phoneme_score + (1 - CFG.fusion_alpha) * report.speaker_score
        assert report.final_score == pytest.approx(expected, abs=1e-12)
        assert min(report.phoneme_score, report.speaker_score) <= report.final_score <= max(
            report.phoneme_score, report.speaker_score
        )

    def test_fusion_fixed_point(self):
        # alpha * s + (1 - alpha) * s == s
        for alpha in (0.0, 0.3, 0.8, 1.0):
            s = 0.4375
            assert alpha * s + (1 - alpha) * s == pytest.approx(s, abs=1e-15)

    def test_speaker_only_with_no_intervals(self):
        profile = self._profile_with_everything()
        u = make_utterance([], emb=np.array([0.0, 0.0, 0.0]))
        report = score_utterance(profile, u)
        assert report.tier_used == "speaker_only"
        assert report.phoneme_score is None
        assert report.final_score == report.speaker_score

    def test_phoneme_only_when_no_embedding(self):
        profile = self._profile_with_everything()
        u = make_utterance([("a", [0.0, 0.0])])
        report = score_utterance(profile, u)
        assert report.speaker_score is None
        assert report.final_score == report.phoneme_score

    def test_no_evidence_errors(self):
        profile = self._profile_with_everything()
        u = make_utterance([("☃", [0.0, 0.0])])
        with pytest.raises(PreconditionError, match="no scoreable evidence"):
            score_utterance(profile, u)

    def test_dimension_mismatch_names_both(self):
        profile = self._profile_with_everything()
        u = make_utterance([("a", [0.0, 0.0, 0.0])], dim=3)
        with pytest.raises(PreconditionError, match="D=3.*D=2"):
            score_utterance(profile, u)

    def test_determinism(self):
        profile = self._profile_with_everything()
        u = make_utterance([("a", [0.3, -0.2]), ("s", [1.0, 0.5])], emb=np.array([0.1, 0.2, 0.3]))
        assert score_utterance(profile, u) == score_utterance(profile, u)

    def test_monotone_in_instance_likelihood(self):
        # moving an instance closer to its model mean never lowers the final score
        profile = self._profile_with_everything()
        far = make_utterance([("a", [2.0, 2.0]), ("x", [0.1, 0.1])])
        near = make_utterance([("a", [0.5, 0.5]), ("x", [0.1, 0.1])])
        assert score_utterance(profile, near).final_score >= score_utterance(profile, far).final_score

    def test_scores_strictly_inside_unit_interval(self):
        profile = self._profile_with_everything()
        rng = np.random.default_rng(0)
        for i in range(20):
            u = make_utterance(
                [("a", rng.normal(0, 2, 2)), ("s", rng.normal(0, 2, 2))],
                emb=rng.normal(0, 2, 3),
                uid=f"u{i}",
            )
            report = score_utterance(profile, u)
            for value in (report.phoneme_score, report.speaker_score, report.final_score):
                assert 0.0 < value < 1.0
            for s in report.phoneme_scores:
                assert 0.0 < s.normalized_score < 1.0


class TestExplain:
    def _report_and_utterance(self):
        profile = TestScoreUtterance()._profile_with_everything()
        frames = np.zeros((60, 2))
        u = UtteranceFeatures(
            utterance_id="t1",
            speaker_id="spk",
            label="unknown",
            frames=frames,
            frame_rate_hz=50.0,
            phoneme_intervals=(("a", 0, 49), ("x", 50, 54), ("☃", 55, 59)),
        )
        return score_utterance(profile, u), u

    def test_unit_conversion_inclusive_end(self):
        report, u = self._report_and_utterance()
        records = explain(report, u)
        assert records[0].start_seconds == pytest.approx(0.0)
        assert records[0].end_seconds == pytest.approx(50.0 / 50.0)  # (49 + 1) / 50

    def test_cardinality_and_order(self):
        report, u = self._report_and_utterance()
        records = explain(report, u)
        assert [r.phoneme_label for r in records] == ["a", "x", "☃"]

    def test_unmatched_passthrough(self):
        report, u = self._report_and_utterance()
        records = explain(report, u)
        assert records[2].matched_level == "unmatched"
        assert records[2].normalized_score is None

    def test_mismatched_ids_rejected(self):
        report, u = self._report_and_utterance()
        other = dataclasses.replace(report, utterance_id="someone-else")
        with pytest.raises(PreconditionError, match="report is for"):
            explain(other, u)

    def test_serializations(self, tmp_path):
        report, u = self._report_and_utterance()
        records = explain(report, u)
        parsed = __import__("json").loads(anomaly_report_to_json(records))
        assert len(parsed) == 3 and parsed[2]["score"] is None
        csv_path = tmp_path / "r.csv"
        with open(csv_path, "w", newline="") as fh:
            write_anomaly_csv(records, fh)
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "phoneme,start_s,end_s,score,level"
        assert len(lines) == 4
