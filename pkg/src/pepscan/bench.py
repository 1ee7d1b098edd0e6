"""Protein-set x peptide-set experiment matrix, cost-model calibration, reports.

Timing tables are reproduced through :class:`~pepscan.hw_model.CostModel`.
The software engine's work is counted (edge comparisons) on synthetic
workloads whose protein-set lengths equal the published ones; wall-clock
time is measured alongside but never feeds the deterministic reports.
"""

from __future__ import annotations

import csv
import io
import logging
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import nnls

from .ac_core import (DEFAULT_ALPHABET, Alphabet, Automaton, PatternSet, build_automaton,
                      match_dense, match_sparse)
from .bio_ingest import DigestParams, build_corpus, digest_records, synth_corpus
from .errors import SingularFit
from .hw_model import ComponentSim, CostModel, estimate_time, run_protein_list

log = logging.getLogger(__name__)


class PaperReference:
    """Published tables, keyed by protein-set size then peptide-set size.

    The software-only table was printed with stray digit grouping
    ("311 424", "1 018544"); the values here are the normalized integers.
    """

    residues = {100: 53093, 500: 172141, 1000: 329527}
    peptide_sizes = (100, 500, 1000, 1200)
    hw_us = {
        100: {100: 59209, 500: 59209, 1000: 59171, 1200: 59167},
        500: {100: 192637, 500: 192646, 1000: 192602, 1200: 192602},
        1000: {100: 367323, 500: 367323, 1000: 367323, 1200: 367137},
    }
    sw_us = {
        100: {100: 311424, 500: 357435, 1000: 446742, 1200: 625682},
        500: {100: 1018544, 500: 1164763, 1000: 1616889, 1200: 1848193},
        1000: {100: 1931712, 500: 2231601, 1000: 3102777, 1200: 3428774},
    }
    speedup = {
        100: {100: 5.26, 500: 6.04, 1000: 7.55, 1200: 10.57},
        500: {100: 5.29, 500: 6.05, 1000: 8.39, 1200: 9.60},
        1000: {100: 5.26, 500: 6.08, 1000: 8.45, 1200: 9.34},
    }

    @classmethod
    def has(cls, proteins: int, peptides: int) -> bool:
        return proteins in cls.hw_us and peptides in cls.hw_us[proteins]

    @classmethod
    def cells(cls):
        for p in cls.hw_us:
            for q in cls.peptide_sizes:
                yield p, q


PAPER = PaperReference

DEFAULT_PEPTIDE_DIGEST = DigestParams(min_len=6, max_len=30, dedupe=True)
MEAN_PROTEIN_LENGTH = 330


@dataclass(frozen=True)
class BenchConfig:
    protein_set_sizes: tuple = (100, 500, 1000)
    peptide_set_sizes: tuple = (100, 500, 1000, 1200)
    repetitions: int = 5
    seed: int = 0

    def __post_init__(self):
        for name in ("protein_set_sizes", "peptide_set_sizes"):
            sizes = tuple(int(x) for x in getattr(self, name))
            object.__setattr__(self, name, sizes)
            if not sizes or any(x <= 0 for x in sizes):
                raise ValueError(f"{name} must be non-empty and positive")
            if any(b <= a for a, b in zip(sizes, sizes[1:])):
                raise ValueError(f"{name} must be strictly increasing")
        if self.repetitions < 0:
            raise ValueError("repetitions must be >= 0")


def parse_config(text: str) -> BenchConfig:
    """``key=value`` lines; ``#`` starts a comment. Lists are comma separated."""
    kw: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in ("protein_set_sizes", "peptide_set_sizes"):
            kw[key] = tuple(int(v) for v in value.split(",") if v.strip())
        elif key in ("repetitions", "seed"):
            kw[key] = int(value)
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    return BenchConfig(**kw)


@dataclass
class BenchCell:
    proteins: int
    peptides: int
    text_len: int
    edge_comparisons: int
    fail_traversals: int
    lookups: int
    events: int
    cycles: int
    measured_sw_us: float | None = None
    modeled_sw_us: float | None = None
    modeled_hw_us: float | None = None

    @property
    def speedup(self) -> float | None:
        if self.modeled_sw_us is None or not self.modeled_hw_us:
            return None
        return self.modeled_sw_us / self.modeled_hw_us

    @property
    def comparisons_per_char(self) -> float:
        return self.edge_comparisons / self.text_len if self.text_len else 0.0


# -- synthetic workloads --------------------------------------------------------

def _derived_seed(seed: int, *salt: int) -> int:
    return int(np.random.SeedSequence([seed, *salt]).generate_state(1)[0])


def protein_set_length(proteins: int) -> int:
    return PAPER.residues.get(proteins, proteins * MEAN_PROTEIN_LENGTH)


def make_corpora(sizes, seed: int) -> dict:
    """Nested synthetic protein sets: each larger set extends the previous one."""
    corpora = {}
    records: list = []
    have_p, have_len = 0, 0
    for p in sizes:
        total = protein_set_length(p)
        if total - have_len < p - have_p:
            raise ValueError(f"protein set {p} is shorter than the set it must contain")
        records = records + synth_corpus(p - have_p, total - have_len, _derived_seed(seed, 1, p))
        corpora[p] = build_corpus(records)
        have_p, have_len = p, total
    return corpora


def peptide_pool(count: int, sources: list, seed: int,
                 params: DigestParams = DEFAULT_PEPTIDE_DIGEST) -> list:
    """At least ``count`` distinct tryptic peptides, taken from ``sources`` in
    order and topped up from a dedicated synthetic proteome when short."""
    peps: list = []
    seen: set = set()

    def take(records):
        for pep in digest_records(records, params):
            if pep not in seen:
                seen.add(pep)
                peps.append(pep)

    for records in sources:
        if len(peps) >= count:
            break
        take(records)
    residues = max(2000, count * 25)
    while len(peps) < count:
        take(synth_corpus(residues // MEAN_PROTEIN_LENGTH + 1, residues,
                          _derived_seed(seed, 2, residues)))
        residues *= 2
    return peps


def peptide_sets(sizes, corpora: dict, seed: int) -> dict:
    """Peptide sets digested from the protein sets themselves, smallest first."""
    sources = [corpora[p].records for p in sorted(corpora)]
    pool = peptide_pool(max(sizes), sources, seed)
    return {n: PatternSet(tuple(pool[:n])) for n in sizes}


def _median_time(fn, reps: int) -> float:
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def measure_matrix(cfg: BenchConfig) -> list:
    """Run every cell's engines; fills work profiles and wall-clock only."""
    corpora = make_corpora(cfg.protein_set_sizes, cfg.seed)
    sets = peptide_sets(cfg.peptide_set_sizes, corpora, cfg.seed)
    automata = {q: build_automaton(pats) for q, pats in sets.items()}
    cells = []
    for p in cfg.protein_set_sizes:
        corpus = corpora[p]
        text = corpus.scan_text
        residues = len(text) - (len(corpus.records) - 1)
        for q in cfg.peptide_set_sizes:
            a = automata[q]
            try:
                sparse_events, work = match_sparse(a, text)
                dense_events, dense_work = match_dense(a, text)
                run = run_protein_list(ComponentSim(a), text)
            except Exception as exc:
                raise RuntimeError(f"cell ({p} proteins, {q} peptides): {exc}") from exc
            if not (sparse_events == dense_events == run.events):
                raise RuntimeError(f"cell ({p} proteins, {q} peptides): engines disagree")
            measured = None
            if cfg.repetitions:
                measured = _median_time(lambda: match_sparse(a, text), cfg.repetitions) * 1e6
            log.info("cell %d x %d: %.3f comparisons/char", p, q, work.edge_comparisons / residues)
            cells.append(BenchCell(
                proteins=p, peptides=q, text_len=residues,
                edge_comparisons=work.edge_comparisons, fail_traversals=work.fail_traversals,
                lookups=dense_work.lookups, events=len(sparse_events), cycles=run.cycles,
                measured_sw_us=measured,
            ))
    return cells


# -- calibration ----------------------------------------------------------------

@dataclass
class Calibration:
    model: CostModel
    hw_ratios: dict = field(default_factory=dict)  # (p, q) -> published hw us / residues
    sw_residuals: dict = field(default_factory=dict)  # (p, q) -> relative residual
    fitted_cells: int = 0

    def report(self) -> str:
        m = self.model
        lines = [
            "## Calibration",
            "",
            f"- hw_us_per_char = {m.hw_us_per_char:.6f} (mean of {len(self.hw_ratios)} table cells / residues)",
            f"- sw_us_base_per_char = {m.sw_us_base_per_char:.6f}",
            f"- sw_us_per_edge_scan = {m.sw_us_per_edge_scan:.6f}",
            f"- software fit: non-negative relative least squares over {self.fitted_cells} cells",
            "",
        ]
        if self.sw_residuals:
            lines += ["| proteins | peptides | software residual |", "|---:|---:|---:|"]
            for (p, q), r in sorted(self.sw_residuals.items()):
                lines.append(f"| {p} | {q} | {r:+.2%} |")
            lines.append("")
        return "\n".join(lines)


def calibrate(paper=PAPER, cells: list | None = None, seed: int = 0) -> Calibration:
    """Fit the cost model to the published tables.

    The hardware constant is the mean of published co-design time divided by
    residue count over all cells. The software constants solve
    ``time = base * residues + per_edge * edge_comparisons`` in the
    relative least-squares sense over cells present in ``cells``, subject
    to both constants being non-negative.
    """
    ratios = {(p, q): paper.hw_us[p][q] / paper.residues[p] for p, q in paper.cells()}
    hw = sum(ratios.values()) / len(ratios)

    if cells is None:
        cells = measure_matrix(BenchConfig(repetitions=0, seed=seed))
    usable = [c for c in cells if paper.has(c.proteins, c.peptides)
              and c.text_len == paper.residues[c.proteins]]
    if len(usable) < 2:
        raise SingularFit(f"need at least 2 published cells to fit, got {len(usable)}")
    A = np.array([[c.text_len, c.edge_comparisons] for c in usable], dtype=float)
    y = np.array([paper.sw_us[c.proteins][c.peptides] for c in usable], dtype=float)
    Aw = A / y[:, None]
    if np.linalg.matrix_rank(Aw) < 2 or np.linalg.cond(Aw) > 1e12:
        raise SingularFit("design matrix is rank deficient")
    coef, _ = nnls(Aw, np.ones_like(y))
    base, per_edge = (float(v) for v in coef)
    if base <= 0 and per_edge <= 0:
        raise SingularFit("fit collapsed to zero for both software constants")
    if base == 0 or per_edge == 0:
        log.warning("software fit is on its non-negativity bound (base=%g, per_edge=%g)",
                    base, per_edge)
    pred = A @ coef
    residuals = {(c.proteins, c.peptides): float(r)
                 for c, r in zip(usable, (pred - y) / y)}
    return Calibration(CostModel(hw, base, per_edge), ratios, residuals, len(usable))


def apply_model(cells: list, cm: CostModel) -> list:
    for c in cells:
        c.modeled_hw_us = estimate_time(cm, "hardware", c.text_len)
        c.modeled_sw_us = (c.text_len * cm.sw_us_base_per_char
                           + c.edge_comparisons * cm.sw_us_per_edge_scan)
    return cells


def run_matrix(cfg: BenchConfig = BenchConfig(), cost_model: CostModel | None = None) -> list:
    cells = measure_matrix(cfg)
    if cost_model is None:
        try:
            cost_model = calibrate(PAPER, cells).model
        except SingularFit as exc:
            log.warning("calibration unavailable (%s); using default cost model", exc)
            cost_model = CostModel()
    return apply_model(cells, cost_model)


# -- stress family ----------------------------------------------------------------

def stress_spine(length: int = 49, alphabet: Alphabet = DEFAULT_ALPHABET, seed: int = 0) -> bytes:
    """Spine string whose first symbol occurs nowhere else in it."""
    symbols = sorted(alphabet.allowed_symbols)
    first, rest = symbols[0], symbols[1:]
    rng = np.random.default_rng(seed)
    return bytes([first] + [rest[i] for i in rng.integers(0, len(rest), length - 1)])


def nested_prefix_family(n: int, spine: bytes | None = None,
                         alphabet: Alphabet = DEFAULT_ALPHABET) -> PatternSet:
    """``n`` patterns branching off successive prefixes of ``spine``.

    Level ``i`` adds ``spine[:i] + c`` for every symbol ``c != spine[i]``, so
    the spine states fill up with edges and the spine continuation is always
    the last edge in each array. Families of different ``n`` over the same
    spine are nested.
    """
    fan = len(alphabet.allowed_symbols) - 1
    levels = -(-n // fan)
    if spine is None:
        spine = stress_spine(levels + 1, alphabet)
    if len(spine) < levels + 1:
        raise ValueError(f"spine of length {len(spine)} supports at most {(len(spine) - 1) * fan} patterns")
    symbols = sorted(alphabet.allowed_symbols)
    pats = []
    for i in range(1, levels + 1):
        for c in symbols:
            if c != spine[i] and len(pats) < n:
                pats.append(spine[:i] + bytes([c]))
    return PatternSet(tuple(pats))


def stress_text(spine: bytes, length: int) -> bytes:
    reps = -(-length // len(spine))
    return (spine * reps)[:length]


def per_char_seconds(engine, a: Automaton, text: bytes, reps: int = 5) -> float:
    return _median_time(lambda: engine(a, text), reps) / len(text)


# -- reports ----------------------------------------------------------------------

CSV_COLUMNS = ("proteins", "peptides", "sw_us", "hw_us", "speedup",
               "paper_sw_us", "paper_hw_us", "paper_speedup", "rel_err")


def _fmt(x, digits: int = 3) -> str:
    return "" if x is None else f"{x:.{digits}f}"


def report_csv(cells: list, paper=PAPER) -> str:
    """One row per cell; ``rel_err`` is the relative error of the speedup."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in cells:
        known = paper.has(c.proteins, c.peptides)
        psw = paper.sw_us[c.proteins][c.peptides] if known else None
        phw = paper.hw_us[c.proteins][c.peptides] if known else None
        psp = paper.speedup[c.proteins][c.peptides] if known else None
        err = (c.speedup - psp) / psp if known and c.speedup is not None else None
        w.writerow([c.proteins, c.peptides, _fmt(c.modeled_sw_us, 1), _fmt(c.modeled_hw_us, 1),
                    _fmt(c.speedup, 4), psw if known else "", phw if known else "",
                    psp if known else "", _fmt(err, 6)])
    return buf.getvalue()


def _grid(cells: list, value, paper_table, title: str, digits: int) -> list:
    rows = sorted({c.proteins for c in cells})
    cols = sorted({c.peptides for c in cells})
    by = {(c.proteins, c.peptides): c for c in cells}
    lines = [f"### {title}", "",
             "| proteins \\ peptides | " + " | ".join(str(q) for q in cols) + " |",
             "|---|" + "---:|" * len(cols)]
    for p in rows:
        out = []
        for q in cols:
            c = by.get((p, q))
            v = value(c) if c else None
            if v is None:
                out.append("")
                continue
            text = f"{v:.{digits}f}"
            if paper_table is not None and p in paper_table and q in paper_table[p]:
                ref = paper_table[p][q]
                text += f" / {ref} ({(v - ref) / ref:+.2%})"
            out.append(text)
        lines.append(f"| {p} | " + " | ".join(out) + " |")
    lines.append("")
    return lines


def report_tables(cells: list, paper=PAPER, calibration: Calibration | None = None,
                  paper_tables: bool = True) -> str:
    ref = (lambda t: t) if paper_tables else (lambda t: None)
    lines = ["# Matching time model vs published tables", "",
             "Cells read `model / published (relative error)`; times in microseconds.", ""]
    lines += _grid(cells, lambda c: c.modeled_hw_us, ref(paper.hw_us), "Co-design (hardware model) time", 0)
    lines += _grid(cells, lambda c: c.modeled_sw_us, ref(paper.sw_us), "Software-only model time", 0)
    lines += _grid(cells, lambda c: c.speedup, ref(paper.speedup), "Speedup", 2)
    lines += _grid(cells, lambda c: c.comparisons_per_char, None, "Sparse edge comparisons per character", 3)
    if calibration is not None:
        lines.append(calibration.report())
    return "\n".join(lines).rstrip() + "\n"


def fig4_cells(cells: list) -> list:
    """Cells of the 1200-peptide column (largest column when absent)."""
    if not cells:
        return []
    sizes = {c.peptides for c in cells}
    q = 1200 if 1200 in sizes else max(sizes)
    return sorted((c for c in cells if c.peptides == q), key=lambda c: c.text_len)


def fig4_data(cells: list) -> str:
    lines = ["# text_length sw_us hw_us"]
    for c in fig4_cells(cells):
        lines.append(f"{c.text_len} {_fmt(c.modeled_sw_us, 1)} {_fmt(c.modeled_hw_us, 1)}")
    return "\n".join(lines) + "\n"


def wallclock_csv(cells: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("proteins", "peptides", "text_len", "measured_sw_us", "us_per_char",
                "edge_comparisons_per_char"))
    for c in cells:
        if c.measured_sw_us is None:
            continue
        w.writerow([c.proteins, c.peptides, c.text_len, f"{c.measured_sw_us:.1f}",
                    f"{c.measured_sw_us / c.text_len:.4f}", f"{c.comparisons_per_char:.3f}"])
    return buf.getvalue()


def emit_report(cells: list, paper=PAPER, out_dir: str | Path | None = None,
                calibration: Calibration | None = None, paper_tables: bool = True,
                figure: bool = True) -> dict:
    """Render report.csv, tables.md and fig4.dat (plus fig4.png) into ``out_dir``."""
    files = {
        "report.csv": report_csv(cells, paper),
        "tables.md": report_tables(cells, paper, calibration, paper_tables),
        "fig4.dat": fig4_data(cells),
    }
    if any(c.measured_sw_us is not None for c in cells):
        files["wallclock.csv"] = wallclock_csv(cells)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_text(text, encoding="utf-8")
        if figure and fig4_cells(cells):
            from .plotting import plot_fig4
            plot_fig4(fig4_cells(cells), out / "fig4.png", paper)
    return files
