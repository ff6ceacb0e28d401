"""Command-line wrapper: run an extraction job from a JSON description."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import AudioDecodeError, JobError, ModelLoadError
from .extract import extract, job_from_json


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="featex",
        description="Extract frame embeddings, phone intervals and speaker "
                    "embeddings from audio into a feature manifest",
    )
    parser.add_argument("job", help="extraction job JSON file")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        out = extract(job_from_json(args.job))
    except (JobError, AudioDecodeError, ModelLoadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


def entry() -> None:
    raise SystemExit(main())
