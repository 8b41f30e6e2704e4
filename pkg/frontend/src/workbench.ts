/** Workbench state: a session, its history tree, and the selected node.
 *
 * History is a tree, not a stack: applying a step to any selected node adds a
 * child branch, and undo just moves the selection to the parent. Payloads are
 * cached verbatim as the service returned them; problem text always comes
 * from the serialize endpoint, never from client-side formatting.
 */

import { ApiClient, HistoryNode, Json, LiftedJson, ProblemJson } from "./api.js";

export type ViewMode = "constraints" | "diagram" | "dictionary" | "history";

export interface NodeState {
  node: HistoryNode;
  payload: Json;
  /** Canonical problem text from /v1/serialize, when the payload carries a problem. */
  text: string | null;
}

export class Workbench {
  sessionId: string | null = null;
  nodes = new Map<number, NodeState>();
  selected: number | null = null;
  viewMode: ViewMode = "constraints";

  constructor(private readonly api: ApiClient) {}

  get current(): NodeState | null {
    return this.selected === null ? null : (this.nodes.get(this.selected) ?? null);
  }

  get parent(): NodeState | null {
    const cur = this.current;
    if (!cur || cur.node.parent === null) return null;
    return this.nodes.get(cur.node.parent) ?? null;
  }

  async init(): Promise<void> {
    const { id } = await this.api.createSession();
    this.sessionId = id;
  }

  private requireSession(): string {
    if (this.sessionId === null) throw new Error("no session; call init() first");
    return this.sessionId;
  }

  private async ingest(ref: string, node: HistoryNode): Promise<NodeState> {
    const sid = this.requireSession();
    const payload = await this.api.getRef(sid, ref);
    let text: string | null = null;
    const kind = payload["kind"];
    if (kind === "problem") {
      const { kind: _k, ...problem } = payload as { kind: string } & ProblemJson;
      text = (await this.api.serialize(problem as ProblemJson)).text;
    } else if (kind === "lifted") {
      text = (await this.api.serialize((payload as unknown as LiftedJson).problem)).text;
    }
    const state: NodeState = { node, payload, text };
    this.nodes.set(node.id, state);
    this.selected = node.id;
    return state;
  }

  async loadProblem(name: string, text: string): Promise<NodeState> {
    const sid = this.requireSession();
    const { ref, node } = await this.api.addProblem(sid, name, text);
    return this.ingest(ref, node);
  }

  private async applyOp(body: Json): Promise<NodeState> {
    const sid = this.requireSession();
    const cur = this.current;
    if (!cur) throw new Error("no problem selected");
    const { ref, node } = await this.api.apply(sid, {
      ...body,
      input: cur.node.output,
      parent: cur.node.id,
    });
    return this.ingest(ref, node);
  }

  applyRe(): Promise<NodeState> {
    return this.applyOp({ op: "re" });
  }

  applyRere(): Promise<NodeState> {
    return this.applyOp({ op: "rere" });
  }

  applyRename(table: Record<string, string>): Promise<NodeState> {
    return this.applyOp({ op: "rename", table });
  }

  applyDiagram(side: "node" | "edge"): Promise<NodeState> {
    return this.applyOp({ op: "diagram", side });
  }

  applyWeaken(a: number, x: number): Promise<NodeState> {
    return this.applyOp({ op: "weaken", a, x });
  }

  applyRelax(from: string, to: string): Promise<NodeState> {
    return this.applyOp({ op: "relax", from, to });
  }

  /** Move the selection to the parent node; the child branch stays. */
  undo(): NodeState | null {
    const cur = this.current;
    if (!cur || cur.node.parent === null) return null;
    this.selected = cur.node.parent;
    return this.current;
  }

  select(id: number): NodeState {
    const state = this.nodes.get(id);
    if (!state) throw new Error(`unknown history node ${id}`);
    this.selected = id;
    return state;
  }

  historyNodes(): HistoryNode[] {
    return [...this.nodes.values()].map((s) => s.node);
  }
}
