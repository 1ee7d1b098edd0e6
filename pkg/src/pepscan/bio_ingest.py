"""Protein data preparation: FASTA parsing, tryptic digestion, scan corpora."""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidResidue, NoRecords, SentinelInAlphabet, UnsupportedEnzyme

RESIDUES = frozenset(range(ord("A"), ord("Z") + 1))

# Background amino-acid composition (percent) used for synthetic proteins.
AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"
AMINO_FREQ = (8.25, 1.37, 5.45, 6.75, 3.86, 7.07, 2.27, 5.96, 5.84, 9.66,
              2.42, 4.06, 4.70, 3.93, 5.53, 6.56, 5.34, 6.87, 1.08, 2.92)


@dataclass(frozen=True)
class FastaRecord:
    id: str
    description: str
    sequence: bytes


def _normalize(record_id: str, chunks: list) -> bytes:
    seq = b"".join(chunks).upper()
    seq = bytes(b for b in seq if not chr(b).isspace())
    for b in seq:
        if b not in RESIDUES:
            raise InvalidResidue(record_id, b)
    return seq


def parse_fasta(text: str | bytes) -> list:
    """Parse FASTA text into records; sequence lines are case-folded and
    stripped of whitespace. Records with empty sequences are rejected."""
    if isinstance(text, bytes):
        text = text.decode("ascii", errors="replace")
    records = []
    header = None
    chunks: list = []

    def flush():
        rid, desc = header
        seq = _normalize(rid, chunks)
        if not seq:
            raise NoRecords(f"record {rid!r} has no sequence")
        records.append(FastaRecord(rid, desc, seq))

    for line in text.splitlines():
        if line.startswith(">"):
            if header is not None:
                flush()
            parts = line[1:].strip().split(None, 1)
            header = (parts[0] if parts else "", parts[1] if len(parts) > 1 else "")
            chunks = []
        elif header is None:
            if line.strip():
                raise NoRecords("sequence data before the first '>' header")
        else:
            chunks.append(line.encode("ascii", errors="replace"))
    if header is None:
        raise NoRecords("no FASTA records found")
    flush()
    return records


def read_fasta(path: str | Path) -> list:
    return parse_fasta(Path(path).read_text(encoding="utf-8"))


def format_fasta(records: Iterable[FastaRecord], width: int = 60) -> str:
    lines = []
    for r in records:
        lines.append(f">{r.id} {r.description}".rstrip())
        seq = r.sequence.decode("ascii")
        lines.extend(seq[i:i + width] for i in range(0, len(seq), width))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DigestParams:
    enzyme: str = "trypsin"
    missed_cleavages: int = 0
    min_len: int = 1
    max_len: int | None = None
    dedupe: bool = False

    def __post_init__(self):
        if self.enzyme != "trypsin":
            raise UnsupportedEnzyme(f"unsupported enzyme {self.enzyme!r}; only trypsin")
        if not 0 <= self.missed_cleavages <= 3:
            raise ValueError("missed_cleavages must be in 0..3")
        if self.min_len < 1:
            raise ValueError("min_len must be >= 1")
        if self.max_len is not None and self.min_len > self.max_len:
            raise ValueError("min_len exceeds max_len")


@dataclass(frozen=True)
class Peptide:
    sequence: bytes
    start: int
    missed: int


def cleavage_sites(seq: bytes) -> list:
    """Fragment end offsets (exclusive): after K or R unless P follows."""
    ends = []
    n = len(seq)
    for i, b in enumerate(seq):
        if b in b"KR" and i + 1 < n and seq[i + 1] != ord("P"):
            ends.append(i + 1)
    if n:
        ends.append(n)
    return ends


def digest_peptides(seq: bytes | str, p: DigestParams = DigestParams()) -> list:
    """Tryptic peptides with positions, fully cleaved fragments first, then
    the one-missed-cleavage joins, and so on; each group by start offset."""
    if p.enzyme != "trypsin":
        raise UnsupportedEnzyme(p.enzyme)
    if isinstance(seq, str):
        seq = seq.encode("ascii")
    ends = cleavage_sites(seq)
    starts = [0] + ends[:-1]
    out = []
    seen = set()
    for missed in range(p.missed_cleavages + 1):
        for k in range(len(ends) - missed):
            start, end = starts[k], ends[k + missed]
            length = end - start
            if length < p.min_len or (p.max_len is not None and length > p.max_len):
                continue
            pep = seq[start:end]
            if p.dedupe:
                if pep in seen:
                    continue
                seen.add(pep)
            out.append(Peptide(pep, start, missed))
    return out


def digest(seq: bytes | str, p: DigestParams = DigestParams()) -> list:
    return [pep.sequence.decode("ascii") for pep in digest_peptides(seq, p)]


def digest_records(records: Sequence[FastaRecord], p: DigestParams = DigestParams()) -> list:
    """Peptide strings across all records, deduplicated globally if asked."""
    per_record = DigestParams(p.enzyme, p.missed_cleavages, p.min_len, p.max_len, False)
    out = []
    seen = set()
    for r in records:
        for pep in digest(r.sequence, per_record):
            if p.dedupe:
                if pep in seen:
                    continue
                seen.add(pep)
            out.append(pep)
    return out


@dataclass
class ProteinCorpus:
    records: list
    scan_text: bytes
    starts: list = field(default_factory=list)  # scan_text offset of each record

    def locate(self, offset: int) -> tuple:
        """Map a scan_text offset to ``(record index, offset within record)``."""
        idx = bisect.bisect_right(self.starts, offset) - 1
        if idx < 0 or offset - self.starts[idx] >= len(self.records[idx].sequence):
            raise ValueError(f"offset {offset} falls on a separator or outside the text")
        return idx, offset - self.starts[idx]

    @property
    def boundaries(self) -> list:
        return [(s, s + len(r.sequence)) for s, r in zip(self.starts, self.records)]


def build_corpus(records: Sequence[FastaRecord], sentinel: int | str = "#") -> ProteinCorpus:
    if isinstance(sentinel, str):
        sentinel = ord(sentinel)
    if sentinel in RESIDUES:
        raise SentinelInAlphabet(f"sentinel {chr(sentinel)!r} is a residue letter")
    if not records:
        raise NoRecords("cannot build a corpus from zero records")
    starts = []
    pos = 0
    for r in records:
        starts.append(pos)
        pos += len(r.sequence) + 1
    text = bytes([sentinel]).join(r.sequence for r in records)
    return ProteinCorpus(list(records), text, starts)


def corpus_stats(corpus: ProteinCorpus) -> dict:
    lengths = [len(r.sequence) for r in corpus.records]
    return {
        "record_count": len(lengths),
        "residue_count": sum(lengths),
        "lengths": lengths,
    }


def stats_json(stats: dict) -> str:
    return json.dumps(stats, sort_keys=True) + "\n"


def stats_table(stats: dict, records: Sequence[FastaRecord] | None = None) -> str:
    lines = [f"{'records':<10}{stats['record_count']:>12}",
             f"{'residues':<10}{stats['residue_count']:>12}", ""]
    names = [r.id for r in records] if records else [str(i) for i in range(stats["record_count"])]
    width = max([len(n) for n in names] + [6])
    lines.append(f"{'record':<{width}}  {'length':>8}")
    for name, n in zip(names, stats["lengths"]):
        lines.append(f"{name:<{width}}  {n:>8}")
    return "\n".join(lines) + "\n"


def synth_lengths(records: int, total_length: int, rng: np.random.Generator) -> list:
    """Split ``total_length`` into ``records`` positive lengths (lognormal shape)."""
    if records < 1 or total_length < records:
        raise ValueError("need at least one residue per record")
    raw = rng.lognormal(0.0, 0.5, records)
    share = raw / raw.sum() * (total_length - records)
    lengths = np.floor(share).astype(np.int64) + 1
    short = total_length - int(lengths.sum())
    order = np.argsort(-(share - np.floor(share)), kind="stable")
    lengths[order[:short]] += 1
    return [int(n) for n in lengths]


def synth_corpus(records: int, total_length: int, seed: int = 0) -> list:
    """Deterministic synthetic proteome with an exact total residue count."""
    rng = np.random.default_rng(seed)
    lengths = synth_lengths(records, total_length, rng)
    freq = np.array(AMINO_FREQ) / sum(AMINO_FREQ)
    letters = np.frombuffer(AMINO_ACIDS.encode("ascii"), dtype=np.uint8)
    residues = letters[rng.choice(len(letters), size=total_length, p=freq)].tobytes()
    out = []
    pos = 0
    for i, n in enumerate(lengths):
        out.append(FastaRecord(f"SYN{seed}_{i:05d}", f"synthetic protein length={n}",
                               residues[pos:pos + n]))
        pos += n
    return out
