// DOM layer: four panels (launcher, phase tree, stepper, contig explorer)
// plus the two-session compare pane. All reads and writes go through the
// SessionStore; this module only renders and wires events.

import { ApiError, PHASE_ORDER, PHASE_PARAMS, SessionView } from "./types.js";
import {
  bracketRepeats,
  escapeHtml,
  formatReportRow,
  histogramBars,
  largestSizes,
  sortContigsBySize,
} from "./render.js";
import { TreeNode } from "./tree.js";
import { SessionBusy, SessionStore } from "./store.js";
import { ContigRow, RepeatHit } from "./types.js";

interface SessionData {
  contigs?: ContigRow[];
  repeats?: RepeatHit[];
  histogram?: { coverage: number; count: number; height: number }[];
  contigCount?: number;
}

export class Workbench {
  private selected: string | null = null;
  private compare: string[] = [];
  private readonly logs = new Map<string, string[]>();
  private readonly data = new Map<string, SessionData>();
  private detailContig: number | null = null;
  /** Last in-flight UI action; tests await this instead of sleeping. */
  lastAction: Promise<void> = Promise.resolve();

  constructor(
    private readonly root: HTMLElement,
    readonly store: SessionStore,
  ) {
    root.innerHTML = `
      <section class="launcher" data-testid="launcher">
        <h2>New session</h2>
        <form>
          <label>input path <input name="input" data-testid="input"></label>
          <label>k <input name="k" data-testid="k" value="31" size="4"></label>
          <label>cut <input name="cut" data-testid="cut" value="0" size="4"></label>
          <button type="submit" data-testid="launch" disabled>launch</button>
        </form>
        <p class="error" data-testid="launch-error"></p>
      </section>
      <section class="tree" data-testid="tree"><h2>Phase tree</h2><div class="forest"></div></section>
      <section class="stepper" data-testid="stepper"><h2>Phases</h2><div class="controls"></div><pre class="log" data-testid="log"></pre></section>
      <section class="explorer" data-testid="explorer"><h2>Contigs</h2><div class="table"></div><pre class="detail" data-testid="detail"></pre></section>
      <section class="compare" data-testid="compare"><h2>Compare</h2><div class="panes"></div></section>
    `;
    this.wireLauncher();
    store.subscribe(() => this.render());
    this.render();
  }

  private q<T extends HTMLElement>(selector: string): T {
    const el = this.root.querySelector(selector);
    if (!el) throw new Error(`missing element: ${selector}`);
    return el as T;
  }

  private act(work: () => Promise<void>): void {
    this.lastAction = work().catch((err) => this.showError(err));
  }

  private showError(err: unknown): void {
    const line = err instanceof Error ? `${err.name}: ${err.message}` : String(err);
    if (this.selected) this.appendLog(this.selected, `error ${line}`);
    this.q<HTMLElement>(".launcher .error").textContent = line;
    this.render();
  }

  private appendLog(sid: string, line: string): void {
    const lines = this.logs.get(sid) ?? [];
    lines.push(line);
    this.logs.set(sid, lines);
  }

  // --- launcher ---

  private wireLauncher(): void {
    const form = this.q<HTMLFormElement>(".launcher form");
    const input = this.q<HTMLInputElement>("[data-testid=input]");
    const submit = this.q<HTMLButtonElement>("[data-testid=launch]");
    input.addEventListener("input", () => {
      submit.disabled = input.value.trim() === "";
    });
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const k = Number(this.q<HTMLInputElement>("[data-testid=k]").value);
      const cut = Number(this.q<HTMLInputElement>("[data-testid=cut]").value);
      this.act(async () => {
        this.q<HTMLElement>(".launcher .error").textContent = "";
        try {
          const sid = await this.store.launch({ input: input.value.trim(), k, cut });
          this.selected = sid;
          this.render();
        } catch (err) {
          if (err instanceof ApiError) {
            this.q<HTMLElement>(".launcher .error").textContent =
              `${err.body.error}${err.body.detail ? `: ${err.body.detail}` : ""}`;
            return;
          }
          throw err;
        }
      });
    });
  }

  // --- actions driven by the tree and stepper ---

  select(sid: string): void {
    this.selected = sid;
    this.detailContig = null;
    this.act(() => this.loadSessionData(sid));
    this.render();
  }

  toggleCompare(sid: string): void {
    if (this.compare.includes(sid)) {
      this.compare = this.compare.filter((s) => s !== sid);
    } else {
      this.compare = [...this.compare, sid].slice(-2);
    }
    this.act(async () => {
      for (const s of this.compare) await this.loadSessionData(s);
    });
    this.render();
  }

  branch(sid: string): void {
    this.act(async () => {
      const child = await this.store.branch(sid);
      this.appendLog(sid, `branch -> ${child.slice(0, 8)}`);
      this.render();
    });
  }

  runPhase(sid: string, phase: string, params?: Record<string, unknown>): void {
    this.act(async () => {
      try {
        const report = await this.store.runPhase(sid, phase, params);
        this.appendLog(sid, formatReportRow(report));
        await this.loadSessionData(sid);
      } catch (err) {
        if (err instanceof SessionBusy) {
          this.appendLog(sid, "busy  phase already in flight");
          return;
        }
        throw err;
      }
      this.render();
    });
  }

  /** Next Fig. 1 phase not yet in this session's lineage, if any. */
  nextPhase(view: SessionView): string | null {
    const done = new Set(view.lineage.filter((r) => r.ok).map((r) => r.phaseName));
    return PHASE_ORDER.find((p) => !done.has(p)) ?? null;
  }

  private async loadSessionData(sid: string): Promise<void> {
    const view = this.store.views.get(sid);
    if (!view) return;
    const d: SessionData = this.data.get(sid) ?? {};
    if ("contigs" in view.keys) {
      const page = await this.store.client.contigs(sid, {
        sort: "size",
        includeSeq: true,
        limit: 50,
      });
      d.contigs = page.contigs;
      d.contigCount = page.total;
    }
    if ("repeats" in view.keys) d.repeats = await this.store.client.repeats(sid);
    if ("coverage" in view.keys) {
      d.histogram = histogramBars(await this.store.client.coverage(sid));
    }
    this.data.set(sid, d);
    this.render();
  }

  // --- rendering ---

  render(): void {
    this.renderTree();
    this.renderStepper();
    this.renderExplorer();
    this.renderCompare();
  }

  private renderTree(): void {
    const holder = this.q<HTMLElement>(".tree .forest");
    holder.textContent = "";
    const renderNode = (node: TreeNode, into: HTMLElement) => {
      const view = this.store.views.get(node.id);
      const li = document.createElement("li");
      li.dataset.sid = node.id;
      const pick = document.createElement("button");
      pick.className = "pick" + (node.id === this.selected ? " selected" : "");
      pick.textContent = `${node.id.slice(0, 8)} ${view?.state ?? "?"}`;
      pick.addEventListener("click", (ev) => {
        if ((ev as MouseEvent).shiftKey) this.toggleCompare(node.id);
        else this.select(node.id);
      });
      const br = document.createElement("button");
      br.className = "branch";
      br.textContent = "branch";
      br.addEventListener("click", () => this.branch(node.id));
      const cmp = document.createElement("button");
      cmp.className = "cmp" + (this.compare.includes(node.id) ? " selected" : "");
      cmp.textContent = "compare";
      cmp.addEventListener("click", () => this.toggleCompare(node.id));
      li.append(pick, br, cmp);
      if (node.children.length) {
        const ul = document.createElement("ul");
        node.children.forEach((c) => renderNode(c, ul));
        li.append(ul);
      }
      into.append(li);
    };
    const top = document.createElement("ul");
    this.store.forest().forEach((n) => renderNode(n, top));
    holder.append(top);
  }

  private renderStepper(): void {
    const controls = this.q<HTMLElement>(".stepper .controls");
    const log = this.q<HTMLElement>("[data-testid=log]");
    controls.textContent = "";
    const sid = this.selected;
    if (!sid || !this.store.views.has(sid)) {
      log.textContent = "";
      return;
    }
    const view = this.store.views.get(sid)!;
    const busy = this.store.isBusy(sid) || view.state !== "idle";
    const next = this.nextPhase(view);

    const runNext = document.createElement("button");
    runNext.dataset.testid = "run-next";
    runNext.textContent = next ? `run next: ${next.replace(/^miniasm\./, "")}` : "all phases run";
    runNext.disabled = busy || next === null;
    runNext.addEventListener("click", () => {
      if (next) this.runPhase(sid, next, this.readParams(next));
    });
    controls.append(runNext);

    for (const phase of PHASE_ORDER) {
      const row = document.createElement("div");
      row.className = "phase-row";
      const btn = document.createElement("button");
      btn.dataset.phase = phase;
      btn.textContent = phase.replace(/^miniasm\./, "");
      btn.disabled = busy;
      btn.addEventListener("click", () => this.runPhase(sid, phase, this.readParams(phase)));
      row.append(btn);
      for (const p of PHASE_PARAMS[phase] ?? []) {
        const label = document.createElement("label");
        label.textContent = ` ${p.name} `;
        const field = document.createElement("input");
        field.size = 6;
        field.placeholder = p.placeholder;
        field.dataset.param = `${phase}:${p.name}`;
        field.value = this.paramValues.get(`${phase}:${p.name}`) ?? "";
        field.addEventListener("input", () =>
          this.paramValues.set(`${phase}:${p.name}`, field.value),
        );
        label.append(field);
        row.append(label);
      }
      controls.append(row);
    }

    const rows = (this.logs.get(sid) ?? []).map((line) => {
      const cls = line.startsWith("ok") ? "ok" : line.startsWith("failed") ? "fail" : "info";
      return `<span class="${cls}">${escapeHtml(line)}</span>`;
    });
    log.innerHTML = rows.join("\n");
  }

  private readonly paramValues = new Map<string, string>();

  /** Collect non-empty param fields for one phase into a request payload. */
  private readParams(phase: string): Record<string, unknown> | undefined {
    const out: Record<string, unknown> = {};
    for (const p of PHASE_PARAMS[phase] ?? []) {
      const raw = this.paramValues.get(`${phase}:${p.name}`)?.trim();
      if (raw) out[p.name] = /^\d+$/.test(raw) ? Number(raw) : raw;
    }
    return Object.keys(out).length ? out : undefined;
  }

  private renderExplorer(): void {
    const table = this.q<HTMLElement>(".explorer .table");
    const detail = this.q<HTMLElement>("[data-testid=detail]");
    const sid = this.selected;
    const d = sid ? this.data.get(sid) : undefined;
    if (!sid || !d?.contigs) {
      table.innerHTML = `<p class="empty">no contigs yet — run FindPaths</p>`;
      detail.textContent = "";
      return;
    }
    if (d.contigs.length === 0) {
      table.innerHTML = `<p class="empty">no contigs survived filtering</p>`;
      detail.textContent = "";
      return;
    }
    const rows = sortContigsBySize(d.contigs)
      .map(
        (c) =>
          `<tr data-contig="${c.id}" class="${c.id === this.detailContig ? "selected" : ""}">` +
          `<td>${c.id}</td><td>${c.size}</td><td>${c.avgCoverage.toFixed(2)}</td></tr>`,
      )
      .join("");
    table.innerHTML =
      `<table><thead><tr><th>id</th><th>size</th><th>avg cov</th></tr></thead>` +
      `<tbody>${rows}</tbody></table>`;
    table.querySelectorAll("tr[data-contig]").forEach((tr) => {
      tr.addEventListener("click", () => {
        this.detailContig = Number((tr as HTMLElement).dataset.contig);
        this.render();
      });
    });
    const chosen =
      d.contigs.find((c) => c.id === this.detailContig) ?? sortContigsBySize(d.contigs)[0];
    const hits = (d.repeats ?? []).filter((h) => h.contigId === chosen.id);
    detail.textContent = chosen.sequence
      ? `>${chosen.id} size=${chosen.size}\n${bracketRepeats(chosen.sequence, hits)}`
      : `>${chosen.id} size=${chosen.size} (sequence not loaded)`;
  }

  private renderCompare(): void {
    const panes = this.q<HTMLElement>(".compare .panes");
    if (this.compare.length < 2) {
      panes.innerHTML = `<p class="empty">shift-click or use the compare button on two tree nodes</p>`;
      return;
    }
    panes.innerHTML = this.compare
      .map((sid) => {
        const d = this.data.get(sid);
        const sizes = d?.contigs ? largestSizes(d.contigs, 5).join(", ") : "—";
        const count = d?.contigCount ?? "—";
        const bars = (d?.histogram ?? [])
          .map(
            (b) =>
              `<div class="bar" data-cov="${b.coverage}" title="${b.coverage}x: ${b.count}"` +
              ` style="height:${Math.round(b.height * 100)}%"></div>`,
          )
          .join("");
        return (
          `<div class="pane" data-sid="${sid}">` +
          `<h3>${sid.slice(0, 8)}</h3>` +
          `<p class="contig-count">contigs: <b>${count}</b></p>` +
          `<p class="largest">largest: ${sizes}</p>` +
          `<div class="hist" title="coverage histogram (log y)">${bars}</div>` +
          `</div>`
        );
      })
      .join("");
  }
}
