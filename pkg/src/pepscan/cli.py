"""pepscan command line: digest, build, match, simulate, codegen, bench,
stats and synth-corpus subcommands.

Exit status is 0 on success, 1 for usage errors and 2 for data errors.
Set ``PEPSCAN_LOG`` to error, warn, info or debug for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import ac_core, bench, bio_ingest, hdl_codegen, hw_model
from .errors import PepscanError

log = logging.getLogger("pepscan")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
           "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sentinel(value: str) -> int:
    if len(value) != 1 or not value.isascii():
        raise argparse.ArgumentTypeError("sentinel must be a single ASCII character")
    return ord(value)


def _sizes(value: str) -> tuple:
    try:
        return tuple(int(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}")


def _common(p: argparse.ArgumentParser, *names: str) -> None:
    if "patterns" in names:
        p.add_argument("--patterns", metavar="FILE", help="pattern file, one per line")
    if "fasta" in names:
        p.add_argument("--fasta", metavar="FILE", help="FASTA protein file")
    if "table" in names:
        p.add_argument("--table", metavar="FILE", help="JSON transition-table artifact")
    if "out" in names:
        p.add_argument("--out", metavar="PATH", help="output path (default: stdout)")
    if "format" in names:
        p.add_argument("--format", choices=("json", "csv", "text"), default=None)
    if "seed" in names:
        p.add_argument("--seed", type=int, default=0)
    if "sentinel" in names:
        p.add_argument("--sentinel", type=_sentinel, default=ord("#"), metavar="CHAR",
                       help="protein separator byte (default '#')")
    if "trace" in names:
        p.add_argument("--trace", metavar="FILE", help="write a per-byte simulator trace CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pepscan", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("digest", help="tryptic digestion of FASTA proteins into a peptide list")
    _common(p, "fasta", "out", "format")
    p.add_argument("--missed", type=int, default=0, help="missed cleavages (0-3)")
    p.add_argument("--min-len", type=int, default=1)
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--dedupe", action="store_true")
    p.add_argument("--limit", type=int, default=None, help="keep only the first N peptides")

    p = sub.add_parser("build", help="build an automaton and write its table artifact")
    _common(p, "patterns", "out", "sentinel", "format")

    p = sub.add_parser("match", help="locate patterns in FASTA proteins")
    _common(p, "patterns", "table", "fasta", "out", "format", "sentinel", "trace")
    p.add_argument("--engine", choices=("sparse", "dense", "simulate"), default="dense")

    p = sub.add_parser("simulate", help="drive the memory-mapped component model")
    _common(p, "patterns", "table", "fasta", "out", "format", "sentinel", "trace")
    p.add_argument("--text", help="literal text instead of --fasta")

    p = sub.add_parser("codegen", help="emit VHDL, table artifact and validation report")
    _common(p, "patterns", "table", "out", "sentinel")
    p.add_argument("--encoding", choices=("binary", "one-hot"), default="binary")
    p.add_argument("--entity", default="ac_matcher")
    p.add_argument("--report", metavar="FILE",
                   help="validation report path; a .json twin is written next to it")

    p = sub.add_parser("bench", help="run the experiment matrix and write reports")
    _common(p, "out")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", metavar="FILE", help="key=value bench configuration")
    p.add_argument("--proteins", type=_sizes, help="protein set sizes, e.g. 100,500,1000")
    p.add_argument("--peptides", type=_sizes, help="peptide set sizes, e.g. 100,500,1000,1200")
    p.add_argument("--repetitions", type=int, help="wall-clock repetitions (0 skips timing)")
    p.add_argument("--paper-tables", action="store_true",
                   help="show published values and relative errors in tables.md")
    p.add_argument("--no-figure", action="store_true", help="skip fig4.png")

    p = sub.add_parser("stats", help="corpus statistics for a FASTA file")
    _common(p, "fasta", "out", "format", "sentinel")

    p = sub.add_parser("synth-corpus", help="write a synthetic FASTA corpus of exact length")
    _common(p, "out", "seed")
    p.add_argument("--records", type=int, required=True)
    p.add_argument("--total-length", type=int, required=True)
    parser.subcommands = sub.choices
    return parser


def _require(args, *names: str) -> None:
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m for m in missing))


def _write(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_automaton(args) -> ac_core.Automaton:
    if getattr(args, "table", None) and not args.patterns:
        a = hdl_codegen.load_table(Path(args.table).read_text(encoding="utf-8"))
        if a.alphabet.sentinel != args.sentinel:
            log.info("using sentinel %r from the table artifact", chr(a.alphabet.sentinel))
        return a
    alphabet = ac_core.Alphabet(sentinel=args.sentinel)
    return ac_core.build_automaton(ac_core.read_patterns(args.patterns), alphabet)


def _corpus(args, sentinel: int) -> bio_ingest.ProteinCorpus:
    return bio_ingest.build_corpus(bio_ingest.read_fasta(args.fasta), sentinel)


def _events_csv(events, a, corpus) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("pattern_id", "pattern", "record_id", "offset_in_record"))
    for ev in events:
        pat = a.patterns[ev.pattern_id]
        rec, end = corpus.locate(ev.end_offset)
        w.writerow((ev.pattern_id, pat.decode("ascii"), corpus.records[rec].id,
                    end - len(pat) + 1))
    return buf.getvalue()


def _events_json(events, a, corpus) -> str:
    rows = []
    for ev in events:
        pat = a.patterns[ev.pattern_id]
        rec, end = corpus.locate(ev.end_offset)
        rows.append({"pattern_id": ev.pattern_id, "pattern": pat.decode("ascii"),
                     "record_id": corpus.records[rec].id, "offset_in_record": end - len(pat) + 1})
    return json.dumps(rows, indent=1) + "\n"


def cmd_digest(args) -> int:
    _require(args, "fasta")
    params = bio_ingest.DigestParams(missed_cleavages=args.missed, min_len=args.min_len,
                                     max_len=args.max_len, dedupe=args.dedupe)
    peps = bio_ingest.digest_records(bio_ingest.read_fasta(args.fasta), params)
    if args.limit is not None:
        peps = peps[:args.limit]
    if args.format == "json":
        _write(args, json.dumps(peps) + "\n")
    else:
        _write(args, "".join(p + "\n" for p in peps))
    return EXIT_OK


def cmd_build(args) -> int:
    _require(args, "patterns")
    a = _load_automaton(args)
    _write(args, hdl_codegen.table_json(a))
    if args.out:
        print(f"{a.pattern_count} patterns, {a.state_count} states -> {args.out}")
    return EXIT_OK


def _summary(label: str, n_events: int, work: ac_core.WorkProfile, extra: str = "") -> str:
    return (f"{label}: {n_events} events; chars={work.chars} lookups={work.lookups} "
            f"edge_comparisons={work.edge_comparisons} fail_traversals={work.fail_traversals}"
            f"{extra}")


def cmd_match(args) -> int:
    if not (args.patterns or args.table):
        raise UsageError("one of --patterns or --table is required")
    _require(args, "fasta")
    a = _load_automaton(args)
    corpus = _corpus(args, a.alphabet.sentinel)
    text = corpus.scan_text
    extra = ""
    if args.engine == "sparse":
        events, work = ac_core.match_sparse(a, text)
    elif args.engine == "dense":
        events, work = ac_core.match_dense(a, text)
    else:
        sim = hw_model.ComponentSim(a, trace=[] if args.trace else None)
        run = hw_model.run_protein_list(sim, text)
        events = run.events
        work = ac_core.WorkProfile(chars=len(text), lookups=len(text))
        extra = f" cycles={run.cycles} modeled_us={run.modeled_us:.1f}"
        if args.trace:
            Path(args.trace).write_text(hw_model.write_trace(sim.trace), encoding="utf-8")
    body = _events_json(events, a, corpus) if args.format == "json" else _events_csv(events, a, corpus)
    _write(args, body)
    summary = _summary(args.engine, len(events), work, extra)
    print(summary, file=sys.stdout if args.out else sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if not (args.patterns or args.table):
        raise UsageError("one of --patterns or --table is required")
    if not (args.fasta or args.text is not None):
        raise UsageError("one of --fasta or --text is required")
    a = _load_automaton(args)
    text = _corpus(args, a.alphabet.sentinel).scan_text if args.fasta else args.text.encode("ascii")
    sim = hw_model.ComponentSim(a, trace=[] if args.trace else None)
    run = hw_model.run_protein_list(sim, text)
    if args.trace:
        Path(args.trace).write_text(hw_model.write_trace(sim.trace), encoding="utf-8")
    doc = {"events": [[e.pattern_id, e.end_offset] for e in run.events],
           "cycles": run.cycles, "modeled_us": round(run.modeled_us, 3),
           "clock_us": float(sim.elapsed_us)}
    if args.format == "json":
        _write(args, json.dumps(doc, sort_keys=True) + "\n")
    else:
        lines = ["pattern_id,end_offset"] + [f"{p},{o}" for p, o in doc["events"]]
        lines.append(f"# cycles={run.cycles} modeled_us={run.modeled_us:.1f}")
        _write(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_codegen(args) -> int:
    if not (args.patterns or args.table):
        raise UsageError("one of --patterns or --table is required")
    a = _load_automaton(args)
    cfg = hdl_codegen.EncodingConfig(state_encoding=args.encoding, entity_name=args.entity)
    vhdl = hdl_codegen.generate_vhdl(a, cfg)
    _write(args, vhdl)
    if args.patterns and args.table:
        # with --patterns, --table names the artifact to write rather than read
        Path(args.table).write_text(hdl_codegen.table_json(a), encoding="utf-8")
    report = hdl_codegen.validate_design(vhdl, a, cfg)
    if args.report:
        Path(args.report).write_text(report.to_text(), encoding="utf-8")
        Path(args.report).with_suffix(".json").write_text(report.to_json(), encoding="utf-8")
    print(report.to_text(), end="", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK if report.ok else EXIT_DATA


def cmd_bench(args) -> int:
    cfg = bench.BenchConfig()
    if args.config:
        cfg = bench.parse_config(Path(args.config).read_text(encoding="utf-8"))
    overrides = {}
    if args.proteins:
        overrides["protein_set_sizes"] = args.proteins
    if args.peptides:
        overrides["peptide_set_sizes"] = args.peptides
    if args.repetitions is not None:
        overrides["repetitions"] = args.repetitions
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    cells = bench.measure_matrix(cfg)
    calibration = None
    try:
        calibration = bench.calibrate(bench.PAPER, cells)
        model = calibration.model
    except PepscanError as exc:
        log.warning("calibration unavailable (%s); using default cost model", exc)
        model = hw_model.CostModel()
    bench.apply_model(cells, model)
    out = args.out or "bench_out"
    files = bench.emit_report(cells, bench.PAPER, out, calibration,
                              paper_tables=args.paper_tables, figure=not args.no_figure)
    print(f"wrote {', '.join(sorted(files))} to {out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    _require(args, "fasta")
    records = bio_ingest.read_fasta(args.fasta)
    stats = bio_ingest.corpus_stats(bio_ingest.build_corpus(records, args.sentinel))
    if args.format == "json":
        _write(args, bio_ingest.stats_json(stats))
    else:
        _write(args, bio_ingest.stats_table(stats, records))
    return EXIT_OK


def cmd_synth_corpus(args) -> int:
    records = bio_ingest.synth_corpus(args.records, args.total_length, args.seed)
    _write(args, bio_ingest.format_fasta(records))
    return EXIT_OK


COMMANDS = {
    "digest": cmd_digest, "build": cmd_build, "match": cmd_match, "simulate": cmd_simulate,
    "codegen": cmd_codegen, "bench": cmd_bench, "stats": cmd_stats,
    "synth-corpus": cmd_synth_corpus,
}


def main(argv=None) -> int:
    level = _LEVELS.get(os.environ.get("PEPSCAN_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(parser.subcommands[args.command].format_usage())
        print(f"pepscan {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PepscanError, ValueError, OSError, RuntimeError) as exc:
        print(f"pepscan {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
