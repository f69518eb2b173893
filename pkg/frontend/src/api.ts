// Thin fetch wrapper over the session API. All session mutation goes
// through this module, so auditing the workbench's writes means reading
// this file.

import {
  ApiError,
  ContigsPage,
  CoverageStats,
  LaunchForm,
  PhaseReport,
  PipelineInfo,
  RepeatHit,
  SessionView,
} from "./types.js";

/** A phase accepted but still running past the service's patience window. */
export interface RunPending {
  pending: true;
  state: string;
  phase: string;
}

export type RunOutcome = PhaseReport | RunPending;

export function isPending(r: RunOutcome): r is RunPending {
  return (r as RunPending).pending === true;
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<Response> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    return this.fetchFn(`${this.baseUrl}${path}`, init);
  }

  private async json<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.request(method, path, body);
    const data = (await res.json()) as Record<string, unknown>;
    if (!res.ok) throw new ApiError(res.status, data);
    return data as T;
  }

  async createSession(form: LaunchForm): Promise<string> {
    const body: Record<string, unknown> = { input: form.input, k: form.k };
    if (form.cut !== undefined) body.cut = form.cut;
    if (form.maxTipLen != null) body.maxTipLen = form.maxTipLen;
    if (form.pipeline) body.pipeline = form.pipeline;
    const out = await this.json<{ id: string }>("POST", "/sessions", body);
    return out.id;
  }

  /**
   * Run one phase. A 200 is the phase report (including domain failures,
   * which arrive as status "failed(...)"); a 202 means the phase outlived
   * the patience window and the caller should poll inspect().
   */
  async runPhase(
    sid: string,
    phase: string,
    params?: Record<string, unknown>,
  ): Promise<RunOutcome> {
    const res = await this.request("POST", `/sessions/${sid}/run`, { phase, params });
    const data = (await res.json()) as Record<string, unknown>;
    if (res.status === 202) {
      return { pending: true, state: String(data.state), phase: String(data.phase) };
    }
    if (!res.ok) throw new ApiError(res.status, data);
    return data as unknown as PhaseReport;
  }

  async runPipeline(sid: string, name: string): Promise<PhaseReport[]> {
    const out = await this.json<{ reports: PhaseReport[] }>(
      "POST",
      `/sessions/${sid}/runPipeline`,
      { name },
    );
    return out.reports;
  }

  async branch(sid: string): Promise<string> {
    const out = await this.json<{ id: string }>("POST", `/sessions/${sid}/branch`);
    return out.id;
  }

  async inspect(sid: string): Promise<SessionView> {
    return this.json<SessionView>("GET", `/sessions/${sid}`);
  }

  async contigs(
    sid: string,
    opts: { sort?: "id" | "size"; limit?: number; offset?: number; includeSeq?: boolean } = {},
  ): Promise<ContigsPage> {
    const q = new URLSearchParams();
    if (opts.sort) q.set("sort", opts.sort);
    if (opts.limit !== undefined) q.set("limit", String(opts.limit));
    if (opts.offset !== undefined) q.set("offset", String(opts.offset));
    if (opts.includeSeq) q.set("includeSeq", "true");
    const suffix = q.size ? `?${q}` : "";
    return this.json<ContigsPage>("GET", `/sessions/${sid}/contigs${suffix}`);
  }

  async repeats(sid: string): Promise<RepeatHit[]> {
    const out = await this.json<{ repeats: RepeatHit[] }>("GET", `/sessions/${sid}/repeats`);
    return out.repeats;
  }

  async coverage(sid: string): Promise<CoverageStats> {
    return this.json<CoverageStats>("GET", `/sessions/${sid}/coverage`);
  }

  async pipelines(): Promise<PipelineInfo[]> {
    return this.json<PipelineInfo[]>("GET", "/pipelines");
  }
}
