"""Command-line pipeline: synth, build-profile, score, evaluate, explain, distinctiveness.

Human-readable tables go to stdout; machine artifacts only to files. Errors
map to distinct exit codes: 2 for I/O, 3 for file-format problems, 4 for
violated operation preconditions.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import metrics, scoring, synth
from .config import Config, load_config
from .errors import FormatError, PreconditionError
from .features import pool_phoneme_vectors, read_manifest, write_manifest
from .profiling import build_profile, load_profile, save_profile

EXIT_OK = 0
EXIT_IO = 2
EXIT_FORMAT = 3
EXIT_PRECONDITION = 4


def _load_cli_config(args: argparse.Namespace) -> Config:
    config = Config()
    if getattr(args, "config", None):
        config = load_config(args.config, base=config)
    if getattr(args, "seed", None) is not None:
        config = Config(**{**config.to_dict(), "rng_seed": args.seed})
    return config


def _cmd_build_profile(args: argparse.Namespace) -> int:
    config = _load_cli_config(args)
    utterances = read_manifest(args.manifest)
    pool = [u for u in utterances if u.label != "spoof"]
    dropped = len(utterances) - len(pool)
    if dropped:
        print(f"ignoring {dropped} spoof-labeled utterances in enrollment manifest", file=sys.stderr)
    if args.ref_fraction is not None:
        if not 0.0 < args.ref_fraction <= 1.0:
            raise PreconditionError(f"--ref-fraction must be in (0, 1], got {args.ref_fraction}")
        if not pool:
            raise PreconditionError("no bona fide utterances to subsample")
        rng = np.random.default_rng(args.seed if args.seed is not None else config.rng_seed)
        keep = max(1, round(args.ref_fraction * len(pool)))
        chosen = sorted(rng.choice(len(pool), size=keep, replace=False).tolist())
        pool = [pool[i] for i in chosen]
    profile = build_profile(pool, config)
    save_profile(profile, args.out)

    salient = set(profile.salient_phonemes)
    print(f"profile for speaker {profile.speaker_id!r}: {len(pool)} utterances, "
          f"{len(profile.phoneme_models)} phoneme models, {len(profile.class_models)} class models, "
          f"speaker model {'yes' if profile.speaker_model is not None else 'no'}")
    print(f"{'phoneme':<10}{'N_p':>6}{'K':>4}{'mean_ll':>14}{'weight':>14}  salient")
    for label in sorted(profile.phoneme_models):
        pm = profile.phoneme_models[label]
        print(
            f"{label:<10}{pm.sample_count:>6}{pm.model.n_components:>4}"
            f"{pm.mean_log_likelihood:>14.4f}{pm.reliability_weight:>14.6g}"
            f"  {'*' if label in salient else ''}"
        )
    return EXIT_OK


def _cmd_score(args: argparse.Namespace) -> int:
    profile = load_profile(args.profile)
    utterances = read_manifest(args.manifest)
    with open(args.out, "w", encoding="utf-8") as fh:
        for u in utterances:
            report = scoring.score_utterance(profile, u)
            fh.write(json.dumps({
                "id": report.utterance_id,
                "tier": report.tier_used,
                "s_phn": report.phoneme_score,
                "s_spk": report.speaker_score,
                "s_final": report.final_score,
            }) + "\n")
    print(f"scored {len(utterances)} utterances -> {args.out}")
    return EXIT_OK


def read_score_records(path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
            for key in ("id", "tier", "s_final"):
                if key not in rec:
                    raise FormatError(f"{path}: line {lineno}: missing field {key!r}")
            records.append(rec)
    return records


def _cmd_evaluate(args: argparse.Namespace) -> int:
    records = read_score_records(args.scores)
    labels = {u.utterance_id: u.label for u in read_manifest(args.manifest)}
    pairs = []
    skipped = 0
    for rec in records:
        if rec["id"] not in labels:
            raise PreconditionError(f"score record {rec['id']!r} missing from manifest")
        label = labels[rec["id"]]
        if label == "unknown":
            skipped += 1
            continue
        pairs.append((float(rec["s_final"]), label))
    if skipped:
        print(f"skipped {skipped} unknown-labeled utterances", file=sys.stderr)
    result = metrics.evaluate(pairs)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump({
            "auc_percent": result.auc_percent,
            "eer_percent": result.eer_percent,
            "eer_threshold": result.eer_threshold,
            "n_bonafide": result.n_bonafide,
            "n_spoof": result.n_spoof,
            "roc": [[x, y] for x, y in result.roc],
        }, fh)
        fh.write("\n")
    if args.roc_csv:
        with open(args.roc_csv, "w", encoding="utf-8", newline="") as fh:
            metrics.write_roc_csv(result, fh)
    print(f"AUC {result.auc_percent:.2f} EER {result.eer_percent:.2f}")
    return EXIT_OK


def _cmd_explain(args: argparse.Namespace) -> int:
    profile = load_profile(args.profile)
    utterances = read_manifest(args.manifest)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for u in utterances:
        report = scoring.score_utterance(profile, u)
        records = scoring.explain(report, u)
        safe_id = u.utterance_id.replace("/", "_")
        if args.format == "json":
            (out_dir / f"{safe_id}.json").write_text(
                scoring.anomaly_report_to_json(records) + "\n", encoding="utf-8"
            )
        else:
            with open(out_dir / f"{safe_id}.csv", "w", encoding="utf-8", newline="") as fh:
                scoring.write_anomaly_csv(records, fh)
    print(f"wrote {len(utterances)} anomaly reports to {out_dir}")
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = synth.spec_from_json(args.spec)
    if args.seed is not None:
        spec = dataclasses.replace(spec, rng_seed=args.seed)
    enroll, test = synth.generate(spec, args.n_enroll, args.n_genuine, args.n_spoof)
    write_manifest(enroll, args.out_enroll)
    write_manifest(test, args.out_test)
    print(f"wrote {len(enroll)} enrollment and {len(test)} test utterances")
    return EXIT_OK


def _cmd_distinctiveness(args: argparse.Namespace) -> int:
    utterances = read_manifest(args.manifest)
    per_speaker: dict[str, dict[str, list]] = {}
    for u in utterances:
        spk = per_speaker.setdefault(u.speaker_id, {})
        for pv in pool_phoneme_vectors(u):
            spk.setdefault(pv.phoneme_label, []).append(pv.vector)
    matrix = metrics.phoneme_distinctiveness(per_speaker)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        metrics.write_distinctiveness_csv(matrix, fh)
    print(f"wrote {len(matrix.speakers)} x {len(matrix.phonemes)} distinctiveness matrix to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonoprint",
        description="Per-phoneme voice profiling and deepfake consistency scoring",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-profile", help="fit per-phoneme models from an enrollment manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="JSON file with config overrides")
    p.add_argument("--seed", type=int, help="overrides config rng_seed")
    p.add_argument("--ref-fraction", type=float, default=None,
                   help="deterministically subsample this fraction of the reference pool")
    p.set_defaults(func=_cmd_build_profile)

    p = sub.add_parser("score", help="score a test manifest against a profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="JSON-lines score records")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("evaluate", help="ROC/AUC/EER from score records plus manifest labels")
    p.add_argument("--scores", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="evaluation result JSON")
    p.add_argument("--roc-csv", default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("explain", help="write per-phoneme anomaly reports")
    p.add_argument("--profile", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("synth", help="generate synthetic enrollment/test manifests")
    p.add_argument("--spec", required=True, help="synthesis spec JSON")
    p.add_argument("--out-enroll", required=True)
    p.add_argument("--out-test", required=True)
    p.add_argument("--n-enroll", type=int, default=200)
    p.add_argument("--n-genuine", type=int, default=200)
    p.add_argument("--n-spoof", type=int, default=200)
    p.add_argument("--seed", type=int, help="overrides the spec seed")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("distinctiveness", help="speaker x phoneme cosine-distance matrix")
    p.add_argument("--manifest", required=True, help="multi-speaker manifest")
    p.add_argument("--out", required=True, help="CSV output")
    p.set_defaults(func=_cmd_distinctiveness)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    raise SystemExit(main())
