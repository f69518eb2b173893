"""Application layer: the concrete assembly phases, tandem repeat detection
and contig output.

Phases communicate exclusively through data-object keys:

    settings     -> AssemblySettings
    reads        -> tuple of Read
    inputFormat  -> "Fasta format" | "Fastq format"
    graph        -> DeBruijnGraph
    tips         -> frozenset of canonical Kmer
    coverage     -> CoverageStats
    contigs      -> tuple of Contig
    repeats      -> tuple of RepeatHit
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

from .graph import (
    BadParam,
    build_graph,
    coverage_histogram,
    extract_paths,
    find_tips,
    spell,
)
from .pipeline import DataObject, Phase, PhaseRegistry
from .seq import (
    FASTA_LINE_WIDTH,
    BadK,
    PackedSeq,
    Read,
    check_k,
    encode,
    scan_records,
)

CONTIG_RENDER_BASES = 60


@dataclass(frozen=True)
class AssemblySettings:
    """Run parameters seeded into every data object as the 'settings' key."""

    input_path: str
    k: int = 31
    cut: int = 0
    max_tip_len: Optional[int] = None  # None means 2k
    pipeline_name: str = "default"

    def __post_init__(self):
        check_k(self.k)
        if self.cut < 0:
            raise BadParam(f"cut must be >= 0, got {self.cut}")

    def effective_max_tip_len(self) -> int:
        return self.max_tip_len if self.max_tip_len is not None else 2 * self.k


@dataclass(frozen=True)
class Contig:
    """A spelled unambiguous path."""

    id: int
    seq: PackedSeq
    avg_coverage: float

    @property
    def size(self) -> int:
        return len(self.seq)


@dataclass(frozen=True)
class RepeatHit:
    """A maximal tandem repeat: ``span_length`` covers only full motif copies."""

    contig_id: int
    start: int
    span_length: int
    motif: str

    @property
    def repetitions(self) -> int:
        return self.span_length // len(self.motif)

    @property
    def display_pattern(self) -> str:
        return " ".join([self.motif] * self.repetitions)


def _is_primitive(motif: str) -> bool:
    return (motif + motif).find(motif, 1) == len(motif)


def tandem_repeats(s: str, min_tot_len: int = 8, min_motif_len: int = 3) -> list[tuple[int, int, str]]:
    """All maximal tandem repeats of ``s`` as (start, span, motif) triples.

    A hit needs a primitive motif of length >= min_motif_len repeated at least
    twice in full with total span >= min_tot_len, and the repetition must not
    extend by a full motif on either side. Ordered by start, then motif length.
    """
    if min_motif_len < 1 or min_tot_len < 2 * min_motif_len:
        raise BadParam(
            f"need minMotifLen >= 1 and minTotLen >= 2*minMotifLen, "
            f"got ({min_tot_len}, {min_motif_len})"
        )
    n = len(s)
    hits: list[tuple[int, int, str]] = []
    if n < min_tot_len:
        return hits
    a = np.frombuffer(s.encode("ascii"), dtype=np.uint8)
    for period in range(min_motif_len, n // 2 + 1):
        eq = a[:-period] == a[period:]
        padded = np.concatenate(([False], eq, [False]))
        steps = np.diff(padded.astype(np.int8))
        run_starts = np.flatnonzero(steps == 1)
        run_ends = np.flatnonzero(steps == -1)
        for i0, i1 in zip(run_starts.tolist(), run_ends.tolist()):
            m = i1 - i0
            if m < period:
                continue
            if not _is_primitive(s[i0 : i0 + period]):
                continue  # covered by the shorter-period run
            region_end = i0 + m + period
            for t in range(i0, i0 + period):
                reps = (region_end - t) // period
                span = reps * period
                if reps < 2 or span < min_tot_len:
                    break  # spans only shrink as t advances
                hits.append((t, span, s[t : t + period]))
    hits.sort(key=lambda h: (h[0], len(h[2])))
    return hits


def repeats(contig: Contig, min_tot_len: int = 8, min_motif_len: int = 3) -> list[RepeatHit]:
    return [
        RepeatHit(contig.id, start, span, motif)
        for start, span, motif in tandem_repeats(str(contig.seq), min_tot_len, min_motif_len)
    ]


def render_contig(contig: Contig) -> str:
    s = str(contig.seq)
    if len(s) > CONTIG_RENDER_BASES:
        return s[:CONTIG_RENDER_BASES] + "..."
    return s


def split_on_n(rec_id: str, sequence: str, min_len: int) -> list[tuple[str, str]]:
    """Split a raw sequence on N/n into fragments of at least ``min_len``."""
    kept = []
    parts = [f for f in sequence.upper().split("N") if f]
    for j, frag in enumerate(parts):
        if len(frag) < min_len:
            continue
        frag_id = rec_id if len(parts) == 1 else f"{rec_id}/{j}"
        kept.append((frag_id, frag))
    return kept


class ScanReadsPhase(Phase):
    name = "miniasm.ScanReadsPhase"
    requires = frozenset({"settings"})
    provides = frozenset({"reads", "inputFormat"})

    def run(self, data, params, log):
        settings: AssemblySettings = data.get("settings")
        reads: list[Read] = []
        dropped = 0
        with open(settings.input_path, "rb") as fh:
            raw, tag = scan_records(fh)
            log(tag)
            for rec_id, sequence, quality in raw:
                fragments = split_on_n(rec_id, sequence, settings.k)
                if not fragments and sequence:
                    dropped += 1
                unsplit = "N" not in sequence.upper()
                for frag_id, frag in fragments:
                    # quality survives only when the read was not split
                    reads.append(Read(frag_id, encode(frag), quality if unsplit else None))
        if dropped:
            log(f"warning: {dropped} reads dropped (no fragment of length >= k after N-splitting)")
        log(f"{len(reads)} reads")
        data.put("reads", tuple(reads))
        data.put("inputFormat", tag)


class BuildGraphPhase(Phase):
    name = "miniasm.BuildGraphPhase"
    requires = frozenset({"reads", "settings"})
    provides = frozenset({"graph"})

    def run(self, data, params, log):
        settings: AssemblySettings = data.get("settings")
        g = build_graph(data.get("reads"), settings.k)
        log(f"{g.node_count} nodes")
        log(f"{g.adjacency_count} edges")
        if g.total_kmers:
            log(
                f"{g.node_count} distinct of {g.total_kmers} total k-mers, "
                f"dedup ratio: {1 - g.node_count / g.total_kmers:.2f}"
            )
        if g.skipped_reads:
            log(f"{g.skipped_reads} reads shorter than k skipped")
        data.put("graph", g)


class FindTipsPhase(Phase):
    name = "miniasm.FindTipsPhase"
    requires = frozenset({"graph", "settings"})
    provides = frozenset({"tips"})
    defaults = {"maxTipLen": None}

    def run(self, data, params, log):
        settings: AssemblySettings = data.get("settings")
        max_tip_len = params.get("maxTipLen")
        if max_tip_len is None:
            max_tip_len = settings.effective_max_tip_len()
        tips = frozenset(find_tips(data.get("graph"), int(max_tip_len)))
        log(f"{len(tips)} tip nodes (maxTipLen={int(max_tip_len)})")
        data.put("tips", tips)


class ComputeCoveragePhase(Phase):
    name = "miniasm.ComputeCoveragePhase"
    requires = frozenset({"graph"})
    provides = frozenset({"coverage"})

    def run(self, data, params, log):
        stats = coverage_histogram(data.get("graph"))
        log(f"mean coverage: {stats.mean:.2f}")
        data.put("coverage", stats)


class FindPathsPhase(Phase):
    name = "miniasm.FindPathsPhase"
    requires = frozenset({"graph", "settings"})
    provides = frozenset({"contigs"})
    defaults = {"cut": None}

    def run(self, data, params, log):
        settings: AssemblySettings = data.get("settings")
        cut = params.get("cut")
        cut = settings.cut if cut is None else int(cut)
        tips = data.get("tips") if data.has("tips") else frozenset()
        paths = extract_paths(data.get("graph"), cut=cut, tips=tips)
        spelled = [(spell(p), p) for p in paths]
        spelled.sort(key=lambda sp: str(sp[0]))
        contigs = tuple(
            Contig(i, seq, round(p.mean_coverage, 6))
            for i, (seq, p) in enumerate(spelled)
        )
        log(f"{len(contigs)} contigs (cut={cut})")
        data.put("contigs", contigs)


class FindRepeatsPhase(Phase):
    name = "miniasm.FindRepeatsPhase"
    requires = frozenset({"contigs"})
    provides = frozenset({"repeats"})
    defaults = {"minTotLen": 8, "minMotifLen": 3}

    def run(self, data, params, log):
        min_tot_len = int(params["minTotLen"])
        min_motif_len = int(params["minMotifLen"])
        log("Finding repeats...")
        hits: list[RepeatHit] = []
        for contig in data.get("contigs"):
            for hit in repeats(contig, min_tot_len, min_motif_len):
                hits.append(hit)
                log(
                    f"Contig: {render_contig(contig)} pattern: {hit.display_pattern} "
                    f"start offset: {hit.start}"
                )
        data.put("repeats", tuple(hits))


def write_contig_file(contigs: Sequence[Contig], out: Union[str, os.PathLike, IO[str]]) -> None:
    """Write contigs as FASTA in contig id order, 80-column wrapped, with
    headers of the form ``>contig_<id> length=<size> cov=<avg>``."""

    def _write(fh: IO[str]) -> None:
        for contig in sorted(contigs, key=lambda c: c.id):
            fh.write(f">contig_{contig.id} length={contig.size} cov={contig.avg_coverage:.2f}\n")
            s = str(contig.seq)
            for i in range(0, len(s), FASTA_LINE_WIDTH):
                fh.write(s[i : i + FASTA_LINE_WIDTH] + "\n")

    if hasattr(out, "write"):
        _write(out)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            _write(fh)


def build_registry() -> PhaseRegistry:
    """The application's phase registry; names match the pipeline XML."""
    registry = PhaseRegistry()
    for phase in (
        ScanReadsPhase(),
        BuildGraphPhase(),
        FindTipsPhase(),
        ComputeCoveragePhase(),
        FindPathsPhase(),
        FindRepeatsPhase(),
    ):
        registry.register(phase)
    return registry
