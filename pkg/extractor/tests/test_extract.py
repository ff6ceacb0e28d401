import json
import os

import numpy as np
import pytest
from scipy.io import wavfile

from featex import (
    AudioDecodeError,
    ExtractionJob,
    JobError,
    ModelLoadError,
    extract,
    get_aligner,
    get_encoder,
    intervals_to_frames,
    job_from_json,
    load_audio,
)

RATE = 16000


class TestAudio:
    def test_wav_round_trip_mono(self, tmp_path):
        x = 0.4 * np.sin(2 * np.pi * 220 * np.arange(RATE) / RATE)
        path = tmp_path / "a.wav"
        wavfile.write(path, RATE, (x * 32767).astype(np.int16))
        back = load_audio(path, RATE)
        assert back.shape == (RATE,)
        assert np.abs(back - x).max() < 1e-3

    def test_stereo_downmix_and_resample(self, tmp_path):
        x = 0.1 * np.sin(2 * np.pi * 300 * np.arange(2 * 8000) / 8000)
        stereo = np.stack([x, x], axis=1)
        path = tmp_path / "s.wav"
        wavfile.write(path, 8000, (stereo * 32767).astype(np.int16))
        back = load_audio(path, RATE)
        assert abs(len(back) - 2 * RATE) <= 2

    def test_garbage_file_rejected(self, tmp_path):
        path = tmp_path / "g.wav"
        path.write_bytes(b"not a wav at all")
        with pytest.raises(AudioDecodeError):
            load_audio(path, RATE)

    def test_unknown_extension_rejected(self, tmp_path):
        path = tmp_path / "a.mp3"
        path.write_bytes(b"\x00")
        with pytest.raises(AudioDecodeError, match="unsupported"):
            load_audio(path, RATE)


class TestBackends:
    def test_logmel_shapes(self):
        x = np.sin(2 * np.pi * 200 * np.arange(RATE) / RATE)
        frames, frame_rate = get_encoder("logmel").encode(x, RATE)
        assert frames.shape[1] == 40
        assert frame_rate == pytest.approx(100.0)
        assert np.isfinite(frames).all()

    def test_logmel_custom_bins(self):
        x = np.zeros(RATE // 2)
        frames, _ = get_encoder("logmel:24").encode(x, RATE)
        assert frames.shape[1] == 24

    def test_energy_aligner_on_silence(self):
        spans = get_aligner("energy").align(np.zeros(RATE), RATE)
        assert spans == []

    def test_energy_aligner_finds_segments(self):
        rng = np.random.default_rng(0)
        x = np.concatenate([
            np.zeros(3200),
            0.5 * np.sin(2 * np.pi * 150 * np.arange(4800) / RATE),
            np.zeros(3200),
            0.3 * rng.standard_normal(3200),
            np.zeros(3200),
        ])
        spans = get_aligner("energy").align(x, RATE)
        assert len(spans) >= 2
        for _, t0, t1 in spans:
            assert 0.0 <= t0 < t1 <= len(x) / RATE + 0.05

    def test_unknown_identifiers(self):
        with pytest.raises(ModelLoadError):
            get_encoder("bogus")
        with pytest.raises(ModelLoadError):
            get_aligner("bogus")

    def test_hf_model_load_failure_offline(self, monkeypatch):
        monkeypatch.setenv("HF_HUB_OFFLINE", "1")
        monkeypatch.setenv("TRANSFORMERS_OFFLINE", "1")
        with pytest.raises(ModelLoadError, match="model load failure"):
            get_encoder("hf:this-model-does-not-exist-anywhere")


class TestIntervalConversion:
    def test_floor_ceil_inclusive(self):
        spans = [("a", 0.0, 0.25), ("b", 0.25, 0.5)]
        out = intervals_to_frames(spans, frame_rate=100.0, n_frames=50)
        assert out == [("a", 0, 24), ("b", 25, 49)]

    def test_clipping(self):
        out = intervals_to_frames([("a", -0.1, 99.0)], frame_rate=100.0, n_frames=10)
        assert out == [("a", 0, 9)]

    def test_collapsed_span_dropped(self):
        assert intervals_to_frames([("a", 0.5, 0.5)], 100.0, 100) == []


class TestJob:
    def test_job_validation(self):
        with pytest.raises(JobError, match="audio"):
            ExtractionJob(audio_files=(), speaker_id="x", label="bonafide", output="o.jsonl")
        with pytest.raises(JobError, match="label"):
            ExtractionJob(audio_files=("a.wav",), speaker_id="x", label="real", output="o.jsonl")

    def test_job_from_json_with_dir(self, tmp_path, smoke_wavs):
        audio_dir = os.path.dirname(smoke_wavs[0])
        job_path = tmp_path / "job.json"
        job_path.write_text(json.dumps({
            "audio_dir": audio_dir,
            "speaker_id": "poi",
            "label": "bonafide",
            "output": str(tmp_path / "out.jsonl"),
        }))
        job = job_from_json(job_path)
        assert len(job.audio_files) == 5
        assert job.encoder == "logmel"

    def test_job_unknown_field(self, tmp_path):
        job_path = tmp_path / "job.json"
        job_path.write_text(json.dumps({"audio": ["a.wav"], "output": "o", "nope": 1}))
        with pytest.raises(JobError, match="unknown"):
            job_from_json(job_path)


class TestExtract:
    def test_silence_yields_frames_no_intervals(self, tmp_path):
        path = tmp_path / "sil.wav"
        wavfile.write(path, RATE, np.zeros(RATE, dtype=np.int16))
        out = tmp_path / "m.jsonl"
        job = ExtractionJob(audio_files=(str(path),), speaker_id="poi", label="bonafide",
                            output=str(out))
        extract(job)
        lines = out.read_text().splitlines()
        rec = json.loads(lines[1])
        assert len(rec["frames"]) >= 1
        assert rec["phonemes"] == []

    def test_deterministic_reruns(self, tmp_path, smoke_wavs):
        out_a = tmp_path / "a.jsonl"
        out_b = tmp_path / "b.jsonl"
        for out in (out_a, out_b):
            extract(ExtractionJob(audio_files=tuple(smoke_wavs), speaker_id="poi",
                                  label="bonafide", output=str(out)))
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_intervals_within_frame_range(self, tmp_path, smoke_wavs):
        out = tmp_path / "m.jsonl"
        extract(ExtractionJob(audio_files=tuple(smoke_wavs), speaker_id="poi",
                              label="bonafide", output=str(out)))
        for line in out.read_text().splitlines()[1:]:
            rec = json.loads(line)
            t_max = len(rec["frames"]) - 1
            for _, start, end in rec["phonemes"]:
                assert 0 <= start <= end <= t_max

    def test_undecodable_audio_is_error(self, tmp_path):
        bad = tmp_path / "bad.wav"
        bad.write_bytes(b"junk")
        job = ExtractionJob(audio_files=(str(bad),), speaker_id="poi", label="bonafide",
                            output=str(tmp_path / "m.jsonl"))
        with pytest.raises(AudioDecodeError):
            extract(job)
