// Pure presentation helpers: everything here maps service JSON to strings
// or plain data, so it is unit-testable without a DOM.

import { ContigRow, CoverageStats, PhaseReport, RepeatHit } from "./types.js";

/**
 * Render a contig sequence with each tandem-repeat span wrapped in square
 * brackets, e.g. `...GTC[TGTCTCCTAGTGTCTCCTAG]TGT...`. Hits are assumed
 * non-overlapping; out-of-range hits are ignored.
 */
export function bracketRepeats(sequence: string, hits: RepeatHit[]): string {
  const valid = hits
    .filter((h) => h.start >= 0 && h.start + h.spanLength <= sequence.length)
    .sort((a, b) => a.start - b.start);
  let out = "";
  let pos = 0;
  for (const h of valid) {
    if (h.start < pos) continue; // overlap: keep the earlier hit
    out += sequence.slice(pos, h.start);
    out += `[${sequence.slice(h.start, h.start + h.spanLength)}]`;
    pos = h.start + h.spanLength;
  }
  return out + sequence.slice(pos);
}

/** Contigs ordered largest-first, ties by id, as the explorer displays them. */
export function sortContigsBySize(contigs: ContigRow[]): ContigRow[] {
  return [...contigs].sort((a, b) => b.size - a.size || a.id - b.id);
}

/** The N largest contig sizes, descending, for the compare panel. */
export function largestSizes(contigs: ContigRow[], n: number): number[] {
  return sortContigsBySize(contigs)
    .slice(0, n)
    .map((c) => c.size);
}

/** One log-pane line per phase report, e.g. `ok    BuildGraph 12ms +graph`. */
export function formatReportRow(report: PhaseReport): string {
  const short = report.phaseName.replace(/^miniasm\./, "").replace(/Phase$/, "");
  const keys = report.keysAdded.length ? ` +${report.keysAdded.join(",")}` : "";
  const status = report.ok ? "ok" : report.status;
  return `${status.padEnd(6)}${short} ${report.wallMillis}ms${keys}`;
}

export interface HistogramBar {
  coverage: number;
  count: number;
  /** Bar height in [0, 1], log-scaled because coverage counts are heavy-tailed. */
  height: number;
}

/**
 * Client-side histogram layout from the JSON coverage histogram. Heights
 * are log10(count + 1) normalised to the tallest bar.
 */
export function histogramBars(stats: CoverageStats): HistogramBar[] {
  const entries = Object.entries(stats.histogram)
    .map(([k, v]) => ({ coverage: Number(k), count: v }))
    .sort((a, b) => a.coverage - b.coverage);
  const peak = Math.max(1, ...entries.map((e) => Math.log10(e.count + 1)));
  return entries.map((e) => ({
    coverage: e.coverage,
    count: e.count,
    height: Math.log10(e.count + 1) / peak,
  }));
}

/** Escape text destined for innerHTML. */
export function escapeHtml(s: string): string {
  return s
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
