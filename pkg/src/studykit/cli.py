"""Command-line interface.

Subcommands:
  ingest <corpus-dir>        index chapter files into canonical JSON
  serve                      start the HTTP service
  verify-report <file>       offline report verification (exit 1 on failure)
  estimate-cost <scenario>   deployment cost calculator
  export-report <learner>    write the attested report, CSV summary, figures
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import figures
from .api import Api, make_server
from .config import load_config
from .engine import Engine, ingest_corpus, load_corpus
from .errors import StudykitError
from .gateway import HttpJsonTransport, StubTransport, estimate_cost, load_roster


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--data-dir", dest="data_dir")
    parser.add_argument("--corpus-dir", dest="corpus_dir")
    parser.add_argument("--roster", dest="roster_path")
    parser.add_argument("--seed", dest="rng_seed", type=int)


def _config_from(args: argparse.Namespace):
    overrides = {
        key: getattr(args, key, None)
        for key in ("data_dir", "corpus_dir", "roster_path", "rng_seed")
    }
    return load_config(path=getattr(args, "config", None), overrides=overrides)


def _build_engine(args: argparse.Namespace) -> Engine:
    config = _config_from(args)
    corpus = load_corpus(Path(config.data_dir) / "indexes")
    if not corpus:
        raise StudykitError(
            f"no indexes under {config.data_dir}/indexes; run `studykit ingest` first"
        )
    roster = Path(config.roster_path)
    if roster.exists():
        profiles = load_roster(roster)
        transport = HttpJsonTransport()
    else:
        from .gateway import ProviderProfile

        profiles = [ProviderProfile(provider_id="stub", model_name="stub")]
        transport = StubTransport(generate=_stub_quiz_payload)
        print(
            f"warning: roster {roster} not found; serving with the offline stub",
            file=sys.stderr,
        )
    return Engine(config, corpus, profiles, transport)


def _stub_quiz_payload(profile, prompt: str) -> str:
    # Offline fallback so `serve` works without any provider configured.
    answers = [
        {"text": f"Option {i}", "correct": i == 1, "explanation": f"Because of point {i}."}
        for i in (1, 2, 3)
    ]
    return json.dumps(
        {
            "questions": [
                {"question": f"Placeholder question {n}?", "answers": answers}
                for n in (1, 2, 3)
            ]
        }
    )


def _cmd_ingest(args: argparse.Namespace) -> int:
    config = _config_from(args)
    corpus_dir = args.corpus or config.corpus_dir
    written = ingest_corpus(corpus_dir, Path(config.data_dir) / "indexes")
    if not written:
        print(f"no chapter files found in {corpus_dir}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    engine = _build_engine(args)
    server = make_server(Api(engine), host=args.host, port=args.port)
    print(f"serving on http://{args.host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def _cmd_verify_report(args: argparse.Namespace) -> int:
    engine = _build_engine(args)
    result = engine.verify_report(Path(args.report).read_bytes())
    print(result.verdict.value)
    if result.diagnostic:
        print(result.diagnostic, file=sys.stderr)
    return 0 if result.verified else 1


def _cmd_estimate_cost(args: argparse.Namespace) -> int:
    scenario = json.loads(Path(args.scenario).read_text(encoding="utf-8"))
    breakdown = estimate_cost(
        students=scenario["students"],
        calls_per_day=scenario["calls_per_day"],
        days_per_week=scenario["days_per_week"],
        weeks=scenario["weeks"],
        price_in_per_call=scenario["price_in_per_call"],
        price_out_per_call=scenario["price_out_per_call"],
        total_calls=scenario.get("total_calls"),
    )
    print(f"total_calls {breakdown.total_calls}")
    print(f"in_cost {breakdown.in_cost:.2f}")
    print(f"out_cost {breakdown.out_cost:.2f}")
    print(f"total {breakdown.total_cost:.2f}")
    return 0


def _cmd_export_report(args: argparse.Namespace) -> int:
    engine = _build_engine(args)
    report = engine.export_report(args.learner_id)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    report_path = out_dir / f"report-{report.report_id}.txt"
    report_path.write_bytes(report.file_bytes)

    snapshot = engine.progress(args.learner_id)
    csv_path = out_dir / f"report-{report.report_id}.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "key", "value"])
        writer.writerow(["streak_days", "", snapshot["streak_days"]])
        writer.writerow(["passing_attempts", "", snapshot["passing_attempts"]])
        writer.writerow(["badge_count", "", snapshot["badge_count"]])
        for chapter, value in snapshot["chapter_progress"].items():
            writer.writerow(["chapter_progress", chapter, value])
        for day, count in snapshot["heatmap"].items():
            writer.writerow(["activity", day, count])

    heatmap_path = figures.render_heatmap(
        snapshot["heatmap"], out_dir / f"report-{report.report_id}-heatmap.png"
    )
    progress_path = figures.render_chapter_progress(
        snapshot["chapter_progress"], out_dir / f"report-{report.report_id}-progress.png"
    )
    for path in (report_path, csv_path, heatmap_path, progress_path):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="studykit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="index a corpus directory")
    p_ingest.add_argument("corpus", nargs="?", help="corpus directory (default: config)")
    _add_config_args(p_ingest)
    p_ingest.set_defaults(func=_cmd_ingest)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8080)
    _add_config_args(p_serve)
    p_serve.set_defaults(func=_cmd_serve)

    p_verify = sub.add_parser("verify-report", help="verify an attested report file")
    p_verify.add_argument("report")
    _add_config_args(p_verify)
    p_verify.set_defaults(func=_cmd_verify_report)

    p_cost = sub.add_parser("estimate-cost", help="deployment cost calculator")
    p_cost.add_argument("scenario", help="scenario JSON file")
    p_cost.set_defaults(func=_cmd_estimate_cost)

    p_export = sub.add_parser("export-report", help="export an attested progress report")
    p_export.add_argument("learner_id")
    p_export.add_argument("--out", default="reports")
    _add_config_args(p_export)
    p_export.set_defaults(func=_cmd_export_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StudykitError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
