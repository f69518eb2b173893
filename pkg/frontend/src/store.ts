// Client-side session state: a map of SessionView mirrors kept fresh by
// refresh/poll, plus the one-in-flight-runPhase-per-session guard that
// mirrors the server's 409 rule so the UI can disable buttons instead of
// surfacing protocol errors.

import { ApiClient, RunOutcome, isPending } from "./api.js";
import { buildForest, TreeNode } from "./tree.js";
import { PhaseReport, SessionView } from "./types.js";

const DEFAULT_POLL_MILLIS = 1000;

export class SessionBusy extends Error {
  constructor(readonly sid: string) {
    super(`session ${sid} already has a phase in flight`);
    this.name = "SessionBusy";
  }
}

type Listener = () => void;
type SleepFn = (millis: number) => Promise<void>;

const realSleep: SleepFn = (millis) => new Promise((r) => setTimeout(r, millis));

export class SessionStore {
  readonly views = new Map<string, SessionView>();
  private readonly inflight = new Set<string>();
  private readonly listeners = new Set<Listener>();
  private readonly pollMillis: number;
  private readonly sleep: SleepFn;

  constructor(
    readonly client: ApiClient,
    opts: { pollMillis?: number; sleep?: SleepFn } = {},
  ) {
    this.pollMillis = opts.pollMillis ?? DEFAULT_POLL_MILLIS;
    this.sleep = opts.sleep ?? realSleep;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  isBusy(sid: string): boolean {
    return this.inflight.has(sid);
  }

  forest(): TreeNode[] {
    return buildForest(this.views.values());
  }

  async refresh(sid: string): Promise<SessionView> {
    const view = await this.client.inspect(sid);
    this.views.set(sid, view);
    this.notify();
    return view;
  }

  async refreshAll(): Promise<void> {
    for (const sid of [...this.views.keys()]) await this.refresh(sid);
  }

  async launch(form: Parameters<ApiClient["createSession"]>[0]): Promise<string> {
    const sid = await this.client.createSession(form);
    await this.refresh(sid);
    return sid;
  }

  async branch(sid: string): Promise<string> {
    const child = await this.client.branch(sid);
    await this.refresh(sid);
    await this.refresh(child);
    return child;
  }

  /**
   * Run one phase with the in-flight guard. When the service answers 202,
   * polls inspect() at the configured interval until the session is idle,
   * then reports the last lineage entry.
   */
  async runPhase(
    sid: string,
    phase: string,
    params?: Record<string, unknown>,
  ): Promise<PhaseReport> {
    if (this.inflight.has(sid)) throw new SessionBusy(sid);
    this.inflight.add(sid);
    this.notify();
    try {
      const outcome: RunOutcome = await this.client.runPhase(sid, phase, params);
      if (!isPending(outcome)) {
        await this.refresh(sid);
        return outcome;
      }
      for (;;) {
        await this.sleep(this.pollMillis);
        const view = await this.refresh(sid);
        if (view.state === "idle") {
          const last = view.lineage[view.lineage.length - 1];
          if (!last) throw new Error(`session ${sid} idle with empty lineage`);
          return last;
        }
      }
    } finally {
      this.inflight.delete(sid);
      this.notify();
    }
  }
}
