import { describe, expect, it } from "vitest";

import { ApiClient, isPending } from "../src/api.js";
import { ApiError } from "../src/types.js";

interface Recorded {
  url: string;
  method: string;
  body: unknown;
}

/** A fetch stub that records requests and replays canned responses. */
function fakeFetch(responses: { status: number; body: unknown }[]) {
  const calls: Recorded[] = [];
  const fn = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    calls.push({
      url: String(input),
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    });
    const next = responses.shift();
    if (!next) throw new Error("fakeFetch: no response queued");
    return new Response(JSON.stringify(next.body), {
      status: next.status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fn, calls };
}

describe("ApiClient", () => {
  it("creates sessions and returns the id", async () => {
    const { fn, calls } = fakeFetch([{ status: 201, body: { id: "s1" } }]);
    const client = new ApiClient("http://svc:9", fn);
    const sid = await client.createSession({ input: "/data/reads.fa", k: 21, cut: 2 });
    expect(sid).toBe("s1");
    expect(calls[0]).toEqual({
      url: "http://svc:9/sessions",
      method: "POST",
      body: { input: "/data/reads.fa", k: 21, cut: 2 },
    });
  });

  it("surfaces 4xx bodies as ApiError", async () => {
    const { fn } = fakeFetch([{ status: 400, body: { error: "BadK" } }]);
    const client = new ApiClient("http://svc:9", fn);
    const err = await client.createSession({ input: "x", k: 4 }).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.body.error).toBe("BadK");
  });

  it("passes phase params through runPhase and returns the report on 200", async () => {
    const report = {
      phaseName: "miniasm.FindPathsPhase",
      startedAt: 0,
      wallMillis: 3,
      keysAdded: ["contigs"],
      log: [],
      status: "ok",
      ok: true,
    };
    const { fn, calls } = fakeFetch([{ status: 200, body: report }]);
    const client = new ApiClient("http://svc:9", fn);
    const out = await client.runPhase("s1", "miniasm.FindPathsPhase", { cut: 2 });
    expect(isPending(out)).toBe(false);
    expect(out).toEqual(report);
    expect(calls[0].body).toEqual({ phase: "miniasm.FindPathsPhase", params: { cut: 2 } });
  });

  it("maps 202 to a pending outcome instead of throwing", async () => {
    const { fn } = fakeFetch([
      { status: 202, body: { state: "running(miniasm.BuildGraphPhase)", phase: "miniasm.BuildGraphPhase" } },
    ]);
    const client = new ApiClient("http://svc:9", fn);
    const out = await client.runPhase("s1", "miniasm.BuildGraphPhase");
    expect(isPending(out)).toBe(true);
    if (isPending(out)) expect(out.phase).toBe("miniasm.BuildGraphPhase");
  });

  it("maps the busy-session 409 to ApiError", async () => {
    const { fn } = fakeFetch([
      { status: 409, body: { error: "PhaseRunning", phase: "miniasm.BuildGraphPhase" } },
    ]);
    const client = new ApiClient("http://svc:9", fn);
    const err = await client.runPhase("s1", "miniasm.FindTipsPhase").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
  });

  it("builds contig query strings from options", async () => {
    const { fn, calls } = fakeFetch([
      { status: 200, body: { total: 0, offset: 5, contigs: [] } },
    ]);
    const client = new ApiClient("http://svc:9", fn);
    await client.contigs("s1", { sort: "size", limit: 10, offset: 5, includeSeq: true });
    expect(calls[0].url).toBe(
      "http://svc:9/sessions/s1/contigs?sort=size&limit=10&offset=5&includeSeq=true",
    );
  });

  it("unwraps list envelopes for repeats and pipelines", async () => {
    const hits = [{ contigId: 0, start: 1, spanLength: 6, motif: "ACG", displayPattern: "ACG ACG" }];
    const { fn } = fakeFetch([
      { status: 200, body: { repeats: hits } },
      { status: 200, body: [{ name: "default", phases: ["miniasm.ScanReadsPhase"] }] },
    ]);
    const client = new ApiClient("http://svc:9", fn);
    expect(await client.repeats("s1")).toEqual(hits);
    expect((await client.pipelines())[0].name).toBe("default");
  });
});
