"""Batch entry point.

Flags use the single-dash style (``-input reads.fa -k 31``). Batch mode loads
the settings XML, runs the named pipeline on a fresh data object, prints one
report line per phase and writes the contig FASTA. ``-serve`` switches to the
HTTP session API instead.

Exit codes: 0 all phases ok, 1 failed phase or I/O error, 2 argument errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from .phases import AssemblySettings, build_registry, write_contig_file
from .pipeline import DataObject, PhaseReport, run_pipeline, parse_settings
from .seq import BadK, check_k

USAGE = (
    "usage: miniasm -input <reads.fa|fq> [-k 31] [-cut 0] [-pipeline default]\n"
    "               [-settings settings.xml] [-output contigs.fa] [-serve PORT]"
)


@dataclass(frozen=True)
class CliArgs:
    input: Optional[str]
    k: int = 31
    pipeline: str = "default"
    settings_file: str = "settings.xml"
    output: str = "contigs.fa"
    cut: int = 0
    serve: Optional[int] = None


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # no sys.exit from inside the library
        raise _ArgError(message)


def parse_args(argv: Sequence[str]) -> CliArgs:
    """Parse single-dash flags in any order; unknown flags are rejected."""
    parser = _Parser(prog="miniasm", add_help=False, allow_abbrev=False)
    parser.add_argument("-input")
    parser.add_argument("-k", type=int, default=31)
    parser.add_argument("-pipeline", default="default")
    parser.add_argument("-settings", default="settings.xml")
    parser.add_argument("-output", default="contigs.fa")
    parser.add_argument("-cut", type=int, default=0)
    parser.add_argument("-serve", type=int, default=None)
    parser.add_argument("-help", action="store_true")
    ns = parser.parse_args(list(argv))
    if ns.help:
        raise _ArgError("help requested")
    if ns.input is None and ns.serve is None:
        raise _ArgError("MissingInput: -input is required")
    try:
        check_k(ns.k)
    except BadK as exc:
        raise _ArgError(f"BadK: {exc}") from None
    if ns.cut < 0:
        raise _ArgError("cut must be >= 0")
    return CliArgs(
        input=ns.input,
        k=ns.k,
        pipeline=ns.pipeline,
        settings_file=ns.settings,
        output=ns.output,
        cut=ns.cut,
        serve=ns.serve,
    )


def format_report(report: PhaseReport) -> str:
    keys = ",".join(report.keys_added)
    return f"{report.phase_name} {report.status} {report.wall_millis}ms added=[{keys}]"


def run_batch(args: CliArgs, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        with open(args.settings_file, "r", encoding="utf-8") as fh:
            specs = parse_settings(fh.read())
    except OSError as exc:
        print(f"cannot read settings file: {exc}", file=err)
        return 1
    by_name = {spec.name: spec for spec in specs}
    if args.pipeline not in by_name:
        avail = ", ".join(sorted(by_name)) or "(none)"
        print(f"unknown pipeline {args.pipeline!r}; available: {avail}", file=err)
        return 1

    data = DataObject()
    data.put(
        "settings",
        AssemblySettings(
            input_path=args.input,
            k=args.k,
            cut=args.cut,
            pipeline_name=args.pipeline,
        ),
    )
    reports = run_pipeline(by_name[args.pipeline], data, build_registry())
    for report in reports:
        print(format_report(report), file=out)
    if data.has("contigs"):
        try:
            write_contig_file(data.get("contigs"), args.output)
        except OSError as exc:
            print(f"cannot write contigs: {exc}", file=err)
            return 1
    return 0 if all(r.ok for r in reports) else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except _ArgError as exc:
        print(str(exc), file=sys.stderr)
        print(USAGE, file=sys.stderr)
        return 2
    if args.serve is not None:
        import uvicorn

        from .service import create_app

        app = create_app(settings_path=args.settings_file)
        uvicorn.run(app, host="127.0.0.1", port=args.serve)
        return 0
    return run_batch(args)


if __name__ == "__main__":
    sys.exit(main())
