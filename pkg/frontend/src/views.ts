/** Pure view renderers: service payloads in, HTML strings out.
 *
 * Diffing is purely line-based on the service's canonical problem text, so
 * nothing semantic happens here.
 */

import { DiagramJson, HistoryNode, LiftedJson } from "./api.js";
import { NodeState } from "./workbench.js";

const escapeHtml = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export interface LineDiff {
  line: string;
  mark: "same" | "added" | "removed";
}

/** Line-set diff of two canonical texts: current lines marked added when the
 * parent lacks them, parent-only lines appended as removed. */
export function diffLines(current: string, parent: string | null): LineDiff[] {
  const cur = current.split("\n").filter((l) => l.length);
  if (parent === null) return cur.map((line) => ({ line, mark: "same" }));
  const par = new Set(parent.split("\n").filter((l) => l.length));
  const curSet = new Set(cur);
  const out: LineDiff[] = cur.map((line) => ({
    line,
    mark: par.has(line) ? "same" : "added",
  }));
  for (const line of par) {
    if (!curSet.has(line)) out.push({ line, mark: "removed" });
  }
  return out;
}

export function renderConstraints(state: NodeState, parent: NodeState | null): string {
  if (state.text === null) return `<p class="empty">the selected step holds no problem</p>`;
  const rows = diffLines(state.text, parent?.text ?? null)
    .map(({ line, mark }) => `<div class="line ${mark}">${escapeHtml(line)}</div>`)
    .join("");
  return `<pre class="constraints">${rows}</pre>`;
}

export function renderDictionary(state: NodeState): string {
  const payload = state.payload as Partial<LiftedJson>;
  if (payload.kind !== "lifted" || !payload.sets) {
    return `<p class="empty">no set-label dictionary on this step</p>`;
  }
  const rows = Object.entries(payload.sets)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(
      ([name, members]) =>
        `<tr><td class="name">${escapeHtml(name)}</td>` +
        `<td class="members">{${members.map(escapeHtml).join(" ")}}</td></tr>`,
    )
    .join("");
  return `<table class="dictionary"><thead><tr><th>label</th><th>stands for</th></tr></thead><tbody>${rows}</tbody></table>`;
}

export function renderDiagram(state: NodeState): string {
  const payload = state.payload as Partial<DiagramJson> & { kind?: string };
  if (payload.kind !== "diagram" || !payload.classes) {
    return `<p class="empty">apply the diagram step to see strength relations</p>`;
  }
  const classes = payload.classes
    .map((cls) => `<span class="cls">${cls.map(escapeHtml).join(" = ")}</span>`)
    .join(", ");
  const edges = (payload.edges ?? [])
    .map(([u, v]) => `<li>${escapeHtml(u)} &rarr; ${escapeHtml(v)}</li>`)
    .join("");
  return (
    `<div class="diagram"><p>side: ${escapeHtml(payload.side ?? "")}</p>` +
    `<p>classes: ${classes}</p><ul class="edges">${edges}</ul>` +
    `<pre class="dot">${escapeHtml(payload.dot ?? "")}</pre></div>`
  );
}

export function renderHistory(nodes: HistoryNode[], selected: number | null): string {
  const children = new Map<number | null, HistoryNode[]>();
  for (const node of nodes) {
    const list = children.get(node.parent) ?? [];
    list.push(node);
    children.set(node.parent, list);
  }
  const renderSubtree = (parent: number | null): string => {
    const kids = children.get(parent) ?? [];
    if (!kids.length) return "";
    const items = kids
      .map(
        (n) =>
          `<li><button class="node${n.id === selected ? " selected" : ""}" data-node="${n.id}">` +
          `${n.id}: ${escapeHtml(n.op)}</button>${renderSubtree(n.id)}</li>`,
      )
      .join("");
    return `<ul class="branch">${items}</ul>`;
  };
  return `<nav class="history">${renderSubtree(null)}</nav>`;
}
