/** Sequence wizard: view-model and renderer for chain certificates. */

import { ApiClient, ApiError, CertificateJson, CertificateStep } from "./api.js";

export interface WizardRow {
  index: number;
  a: number;
  x: number;
  steppedA: number;
  steppedX: number;
  nextA: number;
  nextX: number;
  checks: { name: string; ok: boolean }[];
  allOk: boolean;
  mechanized: string | null;
}

export interface WizardView {
  t: number;
  delta: number;
  x0: number;
  epsilon: number;
  withinGuidance: boolean;
  rows: WizardRow[];
  finalA: number;
  finalX: number;
  finalSolvable: boolean;
  statement: string;
  smallestDelta: number | null;
  valid: boolean;
}

function row(step: CertificateStep): WizardRow {
  const checks = Object.entries(step.checks).map(([name, ok]) => ({ name, ok }));
  return {
    index: step.index,
    a: step.params.a,
    x: step.params.x,
    steppedA: step.stepped.a,
    steppedX: step.stepped.x,
    nextA: step.next.a,
    nextX: step.next.x,
    checks,
    allOk: checks.every((c) => c.ok),
    mechanized: step.mechanized ? step.mechanized.narrative : null,
  };
}

export function certificateView(cert: CertificateJson): WizardView {
  const rows = cert.steps.map(row);
  const finalSolvable = cert.final_verdict.holds;
  return {
    t: cert.t,
    delta: cert.delta,
    x0: cert.x0,
    epsilon: cert.epsilon,
    withinGuidance: cert.x0_within_guidance,
    rows,
    finalA: cert.final_params.a,
    finalX: cert.final_params.x,
    finalSolvable,
    statement: cert.statement,
    smallestDelta: cert.smallest_delta ?? null,
    valid: rows.every((r) => r.allOk) && !finalSolvable,
  };
}

const esc = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function renderWizard(view: WizardView): string {
  const rows = view.rows
    .map((r) => {
      const checks = r.checks
        .map((c) => `<span class="check ${c.ok ? "ok" : "fail"}">${esc(c.name)}</span>`)
        .join(" ");
      const mech = r.mechanized ? `<div class="mech">${esc(r.mechanized)}</div>` : "";
      return (
        `<tr class="${r.allOk ? "ok" : "fail"}"><td>${r.index}</td>` +
        `<td>(a=${r.a}, x=${r.x})</td><td>(a=${r.steppedA}, x=${r.steppedX})</td>` +
        `<td>(a=${r.nextA}, x=${r.nextX})</td><td>${checks}${mech}</td></tr>`
      );
    })
    .join("");
  const badge = view.finalSolvable
    ? `<span class="badge fail">final problem zero-round solvable</span>`
    : `<span class="badge ok">final problem not zero-round solvable</span>`;
  return (
    `<div class="wizard"><p>t = ${view.t}, delta = ${view.delta}, x0 = ${view.x0}, ` +
    `epsilon = ${view.epsilon}${view.withinGuidance ? "" : " (x0 outside guidance)"}</p>` +
    `<table><thead><tr><th>step</th><th>params</th><th>direct step</th><th>next</th>` +
    `<th>checks</th></tr></thead><tbody>${rows}</tbody></table>` +
    `<p>final: (a=${view.finalA}, x=${view.finalX}) ${badge}</p>` +
    (view.smallestDelta === null
      ? ""
      : `<p>smallest delta passing every check: ${view.smallestDelta}</p>`) +
    `<p class="statement">${esc(view.statement)}</p></div>`
  );
}

/** Failing builds come back as failed jobs; surface the message verbatim with
 * the failing index when the service names one. */
export function renderWizardFailure(error: string): string {
  return `<div class="wizard error"><span class="badge fail">certificate failed</span> ${esc(error)}</div>`;
}

export interface WizardRun {
  view: WizardView | null;
  error: string | null;
}

/** Submit, poll to completion, and build the view; one in-flight job at a
 * time with the poll handle exposed through onJob for cancellation. */
export async function runWizard(
  api: ApiClient,
  delta: number,
  x0: number,
  epsilon: number,
  opts: { mechanize?: boolean; onJob?: (id: string) => void; pollMs?: number } = {},
): Promise<WizardRun> {
  try {
    const { job } = await api.submitSequence(delta, x0, epsilon, opts.mechanize ?? false);
    opts.onJob?.(job);
    for (;;) {
      const status = await api.pollJob(job);
      if (status.status === "done") {
        return { view: certificateView(status.result as unknown as CertificateJson), error: null };
      }
      if (status.status === "failed") return { view: null, error: status.error ?? "failed" };
      if (status.status === "cancelled") return { view: null, error: "cancelled" };
      await new Promise((resolve) => setTimeout(resolve, opts.pollMs ?? 150));
    }
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) return { view: null, error: "cancelled" };
    throw err;
  }
}
