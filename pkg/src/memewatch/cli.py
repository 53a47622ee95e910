"""Command line entry point: ``memewatch <command> ...``.

Exit status is 0 on success, 1 for bad input or configuration and 2 for
anything unexpected.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from . import analytics
from .classifier import build_keyword_model, read_stoplist
from .config import configured_suite, read_config
from .detectors import DETECTOR_NAMES
from .exceptions import InputError
from .io import load_dataset, read_events, write_dataset, write_events
from .simulate import KINDS, ScenarioSpec, generate

log = logging.getLogger("memewatch")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(f"{self.prog}: {message}")


def _read_corpus(path: str) -> list[str]:
    p = Path(path)
    if p.suffix.lower() == ".csv":
        try:
            frame = pd.read_csv(p, dtype=str, keep_default_na=False)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
            raise InputError(f"cannot read corpus {p}: {exc}") from exc
        if "name" not in frame.columns:
            raise InputError(f"{p.name} needs a 'name' column")
        names = frame["name"].tolist()
    else:
        try:
            names = p.read_text(encoding="utf-8").splitlines()
        except (OSError, UnicodeDecodeError) as exc:
            raise InputError(f"cannot read corpus {p}: {exc}") from exc
    names = [n for n in names if n.strip()]
    if not names:
        raise InputError("corpus is empty")
    return names


def cmd_ingest(args, config) -> int:
    paths = {"tokens": args.tokens, "ohlcv": args.ohlcv, "trades": args.trades,
             "holders": args.holders, "economics": args.economics}
    dataset = load_dataset(paths)
    write_dataset(dataset, args.out)
    log.info("loaded %d tokens, rejected %d rows", len(dataset.tokens), dataset.n_rejected)
    for key, n in sorted(dataset.rejections.items()):
        log.info("  rejected %s: %d", key, n)
    return 0


def cmd_classify(args, config) -> int:
    stoplist = read_stoplist(args.stoplist) if args.stoplist else frozenset()
    cutoff = args.cutoff if args.cutoff is not None else config.get("classify__cutoff")
    if cutoff is not None and cutoff <= 0:
        raise InputError("cutoff must be positive")
    model = build_keyword_model(_read_corpus(args.corpus), stoplist, cutoff)
    model.to_csv(args.out)
    log.info("kept %d keywords", model.cutoff_k)
    return 0


def cmd_returns(args, config) -> int:
    window = args.window_days or config.get("returns__window_days", analytics.WINDOW_DAYS)
    records = analytics.compute_returns(load_dataset(args.data), args.t0, window)
    analytics.write_returns(args.out, records)
    log.info("%s", analytics.return_summary(records))
    return 0


def cmd_detect(args, config) -> int:
    suite = configured_suite(config)
    kinds = None if args.kind == "all" else [args.kind]
    found = suite.detect(load_dataset(args.data), kinds=kinds, n_jobs=args.jobs)
    write_events(args.out, found.events)
    if args.notes:
        with open(args.notes, "w", encoding="utf-8", newline="\n") as fh:
            for note in found.notes:
                fh.write(json.dumps(asdict(note), sort_keys=True) + "\n")
    log.info("%d events, %d notes", len(found.events), len(found.notes))
    return 0


def _params(pairs: Sequence[str]) -> dict:
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise InputError(f"--param expects key=value, got {pair!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise InputError(f"--param {key}: {value!r} is not a number") from None
    return out


def cmd_simulate(args, config) -> int:
    spec = ScenarioSpec(args.kind, args.seed, args.days, args.tokens, _params(args.param))
    generate(spec).write(args.out)
    return 0


def cmd_report(args, config) -> int:
    chains = None
    if args.tokens:
        chains = {t: rec.chain.value for t, rec in load_dataset({"tokens": args.tokens}).tokens.items()}
    events = read_events(args.events)
    report = analytics.prevalence(analytics.read_returns(args.returns), events, chains)
    analytics.render_report(args.out, report, events)
    log.info("union %d of %d high-return tokens", report.union, report.high_return)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="memewatch", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="flat key=value threshold overrides")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate raw files into a clean dataset directory")
    for name in ("tokens", "ohlcv", "trades", "holders"):
        p.add_argument(f"--{name}", required=name == "tokens")
    p.add_argument("--economics")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("classify", help="build a keyword model from a verified meme corpus")
    p.add_argument("--corpus", required=True, help="text file (one name per line) or CSV with a name column")
    p.add_argument("--stoplist")
    p.add_argument("--cutoff", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("returns", help="categorize returns over an observation window")
    p.add_argument("--data", required=True)
    p.add_argument("--t0", type=int, required=True)
    p.add_argument("--window-days", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_returns)

    p = sub.add_parser("detect", help="run manipulation detectors")
    p.add_argument("--data", required=True)
    p.add_argument("--kind", choices=DETECTOR_NAMES + ("all",), default="all")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--notes", help="also write detector notes as JSON lines")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("simulate", help="generate a labeled synthetic dataset")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tokens", type=int, default=1)
    p.add_argument("--days", type=int, default=60)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="prevalence statistics and report files")
    p.add_argument("--events", required=True)
    p.add_argument("--returns", required=True)
    p.add_argument("--tokens", help="tokens.csv used for the per-chain breakdown")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s", stream=sys.stderr)
        config = read_config(args.config) if args.config else {}
        return args.func(args, config)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
