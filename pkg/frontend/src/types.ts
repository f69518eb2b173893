// Wire types mirroring the miniasm session API (see /openapi.json on a
// running service). Field names match the JSON the service emits.

export interface PhaseReport {
  phaseName: string;
  startedAt: number;
  wallMillis: number;
  keysAdded: string[];
  log: string[];
  status: string; // "ok" or "failed(<reason>)"
  ok: boolean;
}

/** Summary of one data-object entry as reported by inspect(). */
export interface KeySummary {
  kind: string;
  [extra: string]: unknown;
}

/** Client-side mirror of GET /sessions/{id}. */
export interface SessionView {
  id: string;
  parent: string | null;
  children: string[];
  state: string; // "idle" or "running(<phase>)"
  createdAt: number;
  keys: Record<string, KeySummary>;
  lineage: PhaseReport[];
}

export interface ContigRow {
  id: number;
  size: number;
  avgCoverage: number;
  sequence?: string;
  truncated?: boolean;
}

export interface ContigsPage {
  total: number;
  offset: number;
  contigs: ContigRow[];
}

export interface RepeatHit {
  contigId: number;
  start: number;
  spanLength: number;
  motif: string;
  displayPattern: string;
}

export interface CoverageStats {
  histogram: Record<string, number>;
  mean: number;
  empty: boolean;
}

export interface PipelineInfo {
  name: string;
  phases: string[];
}

export interface LaunchForm {
  input: string;
  k: number;
  cut?: number;
  maxTipLen?: number | null;
  pipeline?: string;
}

/** The Fig. 1 assembly phases, in stepping order. */
export const PHASE_ORDER: readonly string[] = [
  "miniasm.ScanReadsPhase",
  "miniasm.BuildGraphPhase",
  "miniasm.FindTipsPhase",
  "miniasm.ComputeCoveragePhase",
  "miniasm.FindPathsPhase",
  "miniasm.FindRepeatsPhase",
];

/** Tunable parameters per phase, used to build the stepper's param form. */
export const PHASE_PARAMS: Record<string, { name: string; placeholder: string }[]> = {
  "miniasm.FindTipsPhase": [{ name: "maxTipLen", placeholder: "2k-2" }],
  "miniasm.FindPathsPhase": [{ name: "cut", placeholder: "from settings" }],
  "miniasm.FindRepeatsPhase": [
    { name: "minTotLen", placeholder: "8" },
    { name: "minMotifLen", placeholder: "3" },
  ],
};

/** Error raised for non-2xx API responses that are protocol errors. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: Record<string, unknown>,
  ) {
    super(`HTTP ${status}: ${JSON.stringify(body)}`);
    this.name = "ApiError";
  }
}
