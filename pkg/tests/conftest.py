from __future__ import annotations

import random

import pytest

DEFAULT_SETTINGS_XML = """<settings>
  <pipeline name="default">
    <phase>miniasm.ScanReadsPhase</phase>
    <phase>miniasm.BuildGraphPhase</phase>
    <phase>miniasm.FindTipsPhase</phase>
    <phase>miniasm.ComputeCoveragePhase</phase>
    <phase>miniasm.FindPathsPhase</phase>
  </pipeline>
</settings>
"""


def random_genome(rng: random.Random, length: int) -> str:
    return "".join(rng.choice("ACGT") for _ in range(length))


def shred(rng: random.Random, genome: str, read_len: int, coverage: float) -> list[str]:
    """Error-free reads sampled from both strands at roughly the given depth."""
    from .oracles import rc

    n_reads = max(1, int(len(genome) * coverage / read_len))
    reads = []
    for _ in range(n_reads):
        start = rng.randrange(0, max(1, len(genome) - read_len + 1))
        r = genome[start : start + read_len]
        if rng.random() < 0.5:
            r = rc(r)
        reads.append(r)
    return reads


def tiling_reads(genome: str, read_len: int, step: int) -> list[str]:
    """Deterministic overlapping tiling that guarantees full k-mer coverage."""
    reads = [genome[i : i + read_len] for i in range(0, len(genome) - read_len + 1, step)]
    if (len(genome) - read_len) % step:
        reads.append(genome[-read_len:])
    return reads


def write_fasta_file(path, records) -> None:
    with open(path, "w") as fh:
        for rid, seq in records:
            fh.write(f">{rid}\n{seq}\n")


@pytest.fixture
def tiny_fasta(tmp_path):
    """Five-read input whose k=3 assembly has a known single backbone."""
    path = tmp_path / "reads.fa"
    write_fasta_file(path, [(f"r{i}", s) for i, s in enumerate(["AAACCC", "AAACCC", "AACC"])])
    return path


@pytest.fixture
def settings_file(tmp_path):
    path = tmp_path / "settings.xml"
    path.write_text(DEFAULT_SETTINGS_XML)
    return path
