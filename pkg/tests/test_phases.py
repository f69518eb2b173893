import io

import pytest

from miniasm import (
    AssemblySettings,
    BadK,
    BadParam,
    Contig,
    DataObject,
    UnknownPhase,
    build_registry,
    decode,
    encode,
    run_phase,
    run_pipeline,
    parse_settings,
    write_contig_file,
)
from miniasm.phases import render_contig, split_on_n

from .conftest import DEFAULT_SETTINGS_XML, write_fasta_file

REG = build_registry()


def seeded(input_path, **kw):
    d = DataObject()
    d.put("settings", AssemblySettings(input_path=str(input_path), **kw))
    return d


def run_named(name, data, params=None):
    return run_phase(REG.resolve(name), data, params)


class TestAssemblySettings:
    def test_defaults(self):
        s = AssemblySettings(input_path="x.fa")
        assert (s.k, s.cut, s.pipeline_name) == (31, 0, "default")
        assert s.effective_max_tip_len() == 62

    def test_explicit_max_tip_len(self):
        assert AssemblySettings(input_path="x", max_tip_len=9).effective_max_tip_len() == 9

    def test_validation(self):
        with pytest.raises(BadK):
            AssemblySettings(input_path="x", k=4)
        with pytest.raises(BadParam):
            AssemblySettings(input_path="x", cut=-1)


class TestSplitOnN:
    def test_no_n(self):
        assert split_on_n("r", "ACGT", 3) == [("r", "ACGT")]

    def test_split_and_filter(self):
        assert split_on_n("r", "ACGTNNAANACGTT", 4) == [("r/0", "ACGT"), ("r/2", "ACGTT")]

    def test_all_too_short(self):
        assert split_on_n("r", "ACNGT", 4) == []

    def test_lowercase_n(self):
        assert split_on_n("r", "acgtnacgta", 4) == [("r/0", "ACGT"), ("r/1", "ACGTA")]


class TestScanReadsPhase:
    def test_fasta(self, tmp_path):
        path = tmp_path / "in.fa"
        write_fasta_file(path, [("a", "ACGTACG"), ("b", "TTTT")])
        d = seeded(path, k=3)
        report = run_named("miniasm.ScanReadsPhase", d)
        assert report.ok
        assert report.keys_added == ("reads", "inputFormat")
        assert d.get("inputFormat") == "Fasta format"
        assert [decode(r.seq) for r in d.get("reads")] == ["ACGTACG", "TTTT"]
        assert "Fasta format" in report.log

    def test_fastq_keeps_quality(self, tmp_path):
        path = tmp_path / "in.fq"
        path.write_text("@a\nACGT\n+\nIIII\n")
        d = seeded(path, k=3)
        run_named("miniasm.ScanReadsPhase", d)
        assert d.get("inputFormat") == "Fastq format"
        (read,) = d.get("reads")
        assert read.quality == "IIII"

    def test_n_reads_are_split(self, tmp_path):
        path = tmp_path / "in.fa"
        write_fasta_file(path, [("a", "ACGTNNTTTT"), ("b", "NAN")])
        d = seeded(path, k=3)
        report = run_named("miniasm.ScanReadsPhase", d)
        reads = d.get("reads")
        assert [(r.id, decode(r.seq)) for r in reads] == [("a/0", "ACGT"), ("a/1", "TTTT")]
        assert all(r.quality is None for r in reads)
        assert any("dropped" in line for line in report.log)

    def test_missing_file_fails_report(self, tmp_path):
        d = seeded(tmp_path / "absent.fa")
        report = run_named("miniasm.ScanReadsPhase", d)
        assert not report.ok
        assert "FileNotFoundError" in report.status
        assert not d.has("reads")

    def test_garbage_file_fails_report(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("this is not sequence data\n")
        d = seeded(path)
        report = run_named("miniasm.ScanReadsPhase", d)
        assert not report.ok
        assert "UnknownFormat" in report.status


class TestAssemblyPhases:
    def _scan_and_build(self, tmp_path, records, k=3):
        path = tmp_path / "in.fa"
        write_fasta_file(path, records)
        d = seeded(path, k=k)
        assert run_named("miniasm.ScanReadsPhase", d).ok
        assert run_named("miniasm.BuildGraphPhase", d).ok
        return d

    def test_build_graph_logs(self, tmp_path):
        d = self._scan_and_build(tmp_path, [("r", "AAACC")])
        report = d.lineage[-1]
        assert "3 nodes" in report.log
        assert "2 edges" in report.log
        assert d.get("graph").node_count == 3

    def test_build_graph_requires_reads(self):
        d = DataObject()
        d.put("settings", AssemblySettings(input_path="x"))
        report = run_named("miniasm.BuildGraphPhase", d)
        assert report.status == "failed(precondition: reads)"

    def test_find_tips(self, tmp_path):
        d = self._scan_and_build(tmp_path, [("r1", "AAACCC"), ("r2", "AACG")])
        report = run_named("miniasm.FindTipsPhase", d)
        assert report.ok
        assert {str(t) for t in d.get("tips")} == {"ACG"}

    def test_find_tips_param_override(self, tmp_path):
        d = self._scan_and_build(tmp_path, [("r1", "AAACCC"), ("r2", "AACG")])
        run_named("miniasm.FindTipsPhase", d, {"maxTipLen": "1"})
        assert {str(t) for t in d.get("tips")} == {"ACG"}

    def test_compute_coverage(self, tmp_path):
        d = self._scan_and_build(tmp_path, [("r1", "AAACC"), ("r2", "AAACC")])
        report = run_named("miniasm.ComputeCoveragePhase", d)
        assert report.ok
        assert d.get("coverage").histogram == {2: 3}

    def test_find_paths_without_tips_key(self, tmp_path):
        d = self._scan_and_build(tmp_path, [("r", "AAACC")])
        report = run_named("miniasm.FindPathsPhase", d)
        assert report.ok
        (contig,) = d.get("contigs")
        assert decode(contig.seq) == "AAACC"
        assert contig.id == 0
        assert contig.avg_coverage == pytest.approx(1.0)

    def test_find_paths_excludes_tips(self, tmp_path):
        d = self._scan_and_build(tmp_path, [("r1", "AAACCC"), ("r2", "AACG")])
        run_named("miniasm.FindTipsPhase", d)
        run_named("miniasm.FindPathsPhase", d)
        assert [decode(c.seq) for c in d.get("contigs")] == ["AAACCC"]

    def test_find_paths_cut_param(self, tmp_path):
        records = [(f"r{i}", "AAAC") for i in range(4)] + [("x", "AAACC")]
        d = self._scan_and_build(tmp_path, records)
        run_named("miniasm.FindPathsPhase", d, {"cut": "2"})
        assert [decode(c.seq) for c in d.get("contigs")] == ["AAAC"]

    def test_contigs_sorted_and_numbered(self, tmp_path):
        d = self._scan_and_build(tmp_path, [("r1", "AACA"), ("r2", "AACG")])
        run_named("miniasm.FindPathsPhase", d)
        contigs = d.get("contigs")
        seqs = [decode(c.seq) for c in contigs]
        assert seqs == sorted(seqs) == ["AAC", "ACA", "ACG"]
        assert [c.id for c in contigs] == [0, 1, 2]

    def test_find_repeats(self, tmp_path):
        d = self._scan_and_build(tmp_path, [("r", "AACCTTACGACGACGGGATTC")], k=7)
        run_named("miniasm.FindPathsPhase", d)
        report = run_named("miniasm.FindRepeatsPhase", d)
        assert report.ok
        assert report.log[0] == "Finding repeats..."
        hits = d.get("repeats")
        assert [(h.start, h.span_length, h.motif) for h in hits] == [(6, 9, "ACG")]
        assert any(
            line == "Contig: AACCTTACGACGACGGGATTC pattern: ACG ACG ACG start offset: 6"
            for line in report.log
        )

    def test_find_repeats_param_override(self, tmp_path):
        d = self._scan_and_build(tmp_path, [("r", "AACCTTACGACGACGGGATTC")], k=7)
        run_named("miniasm.FindPathsPhase", d)
        run_named("miniasm.FindRepeatsPhase", d, {"minTotLen": "20", "minMotifLen": "10"})
        assert d.get("repeats") == ()

    def test_full_default_pipeline(self, tmp_path):
        path = tmp_path / "in.fa"
        write_fasta_file(path, [("r1", "AAACCC"), ("r2", "AAACCC"), ("r3", "AACG")])
        d = seeded(path, k=3)
        (spec,) = parse_settings(DEFAULT_SETTINGS_XML)
        reports = run_pipeline(spec, d, REG)
        assert [r.status for r in reports] == ["ok"] * 5
        assert d.keys() == ["settings", "reads", "inputFormat", "graph", "tips", "coverage", "contigs"]
        assert [decode(c.seq) for c in d.get("contigs")] == ["AAACCC"]


class TestRenderContig:
    def test_short_contig_unabridged(self):
        assert render_contig(Contig(0, encode("ACGT"), 1.0)) == "ACGT"

    def test_long_contig_truncated(self):
        s = "A" * 61
        assert render_contig(Contig(0, encode(s), 1.0)) == "A" * 60 + "..."


class TestWriteContigFile:
    def test_golden_output(self):
        out = io.StringIO()
        write_contig_file([Contig(0, encode("AAACC"), 1.0)], out)
        assert out.getvalue() == ">contig_0 length=5 cov=1.00\nAAACC\n"

    def test_wraps_and_orders(self):
        out = io.StringIO()
        contigs = [
            Contig(1, encode("G" * 85), 2.345678),
            Contig(0, encode("ACGT"), 10.0),
        ]
        write_contig_file(contigs, out)
        lines = out.getvalue().splitlines()
        assert lines == [
            ">contig_0 length=4 cov=10.00",
            "ACGT",
            ">contig_1 length=85 cov=2.35",
            "G" * 80,
            "G" * 5,
        ]

    def test_empty(self, tmp_path):
        path = tmp_path / "out.fa"
        write_contig_file([], path)
        assert path.read_text() == ""


class TestRegistry:
    def test_all_phase_names(self):
        assert REG.names() == [
            "miniasm.BuildGraphPhase",
            "miniasm.ComputeCoveragePhase",
            "miniasm.FindPathsPhase",
            "miniasm.FindRepeatsPhase",
            "miniasm.FindTipsPhase",
            "miniasm.ScanReadsPhase",
        ]

    def test_unknown_phase(self):
        with pytest.raises(UnknownPhase):
            REG.resolve("miniasm.scanreadsphase")
