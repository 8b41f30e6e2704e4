/** Contract test: replaying the recorded session through the workbench must
 * reproduce, byte for byte, the JSON the CLI golden files contain, and the
 * client must issue exactly the recorded request sequence. */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { diffLines, renderConstraints, renderDiagram, renderDictionary } from "../src/views.js";
import { Workbench } from "../src/workbench.js";

const fixture = (name: string): any =>
  JSON.parse(readFileSync(join(__dirname, "fixtures", name), "utf-8"));

interface RecordedStep {
  method: string;
  path: string;
  body: unknown;
  status: number;
  response: unknown;
}

/** Serves recorded responses in order, asserting the request matches. */
function fixtureFetch(steps: RecordedStep[]) {
  let cursor = 0;
  const calls: RecordedStep[] = [];
  const fetchFn = async (url: string, init?: RequestInit) => {
    const expected = steps[cursor];
    expect(expected, `unexpected extra request ${init?.method} ${url}`).toBeDefined();
    cursor += 1;
    expect(`${init?.method ?? "GET"} ${url}`).toBe(`${expected.method} ${expected.path}`);
    if (expected.body !== null && expected.body !== undefined) {
      expect(JSON.parse(String(init?.body))).toEqual(expected.body);
    }
    calls.push(expected);
    return {
      status: expected.status,
      json: async () => JSON.parse(JSON.stringify(expected.response)),
    };
  };
  return { fetchFn, remaining: () => steps.length - cursor };
}

describe("recorded session replay", () => {
  it("reproduces the golden payloads through load, re, rename, diagram", async () => {
    const recording = fixture("session.json");
    const { fetchFn, remaining } = fixtureFetch(recording.steps);
    const api = new ApiClient("", fetchFn);
    const workbench = new Workbench(api);

    await workbench.init();
    expect(workbench.sessionId).toBe("fixturesession");

    const misText: string = fixture("mis3.problem.json").text;
    const loaded = await workbench.loadProblem("mis3", misText);
    // The displayed problem is the serialize endpoint's text, verbatim.
    expect(loaded.text).toBe(misText);

    const reState = await workbench.applyRe();
    const reGolden = fixture("re_mis3.json");
    expect(reState.payload).toEqual({ kind: "lifted", ...reGolden });

    const renamed = await workbench.applyRename({ M: "M", O: "O", "M O": "MO", "O P": "PO" });
    const renamedGolden = fixture("re_mis3_renamed.json");
    expect(renamed.payload).toEqual({ kind: "lifted", ...renamedGolden });

    const diagram = await workbench.applyDiagram("node");
    const diagramGolden = fixture("diagram_re_mis3_renamed_node.json");
    expect(diagram.payload).toEqual({ kind: "diagram", ...diagramGolden });

    expect(remaining()).toBe(0);

    // Views embed only service-sourced content.
    const dict = renderDictionary(renamed);
    for (const [name, members] of Object.entries(renamedGolden.sets as Record<string, string[]>)) {
      expect(dict).toContain(name);
      expect(dict).toContain(`{${(members as string[]).join(" ")}}`);
    }
    const diagramHtml = renderDiagram(diagram);
    for (const [u, v] of diagramGolden.edges as [string, string][]) {
      expect(diagramHtml).toContain(`${u} &rarr; ${v}`);
    }
  });

  it("undo returns to the parent state exactly and keeps the branch", async () => {
    const recording = fixture("session.json");
    const { fetchFn } = fixtureFetch(recording.steps);
    const workbench = new Workbench(new ApiClient("", fetchFn));
    await workbench.init();
    await workbench.loadProblem("mis3", fixture("mis3.problem.json").text);
    const reState = await workbench.applyRe();
    const renamed = await workbench.applyRename({ M: "M", O: "O", "M O": "MO", "O P": "PO" });
    expect(workbench.selected).toBe(renamed.node.id);

    const back = workbench.undo();
    expect(back?.node.id).toBe(reState.node.id);
    expect(back?.payload).toEqual(reState.payload);
    // The undone branch still exists in the tree.
    expect(workbench.historyNodes().map((n) => n.id)).toContain(renamed.node.id);
  });

  it("surfaces service errors verbatim with the failing inequality", async () => {
    const api = new ApiClient("", async () => ({
      status: 422,
      json: async () => ({
        error: "(a=4, x=0) does not weaken (a=3, x=0)",
        inequality: "a <= a' and x >= x'",
      }),
    }));
    try {
      await api.serialize({ delta: 2, nodes: [], edges: [] });
      expect.unreachable("expected the request to throw");
    } catch (err) {
      const apiErr = err as import("../src/api.js").ApiError;
      expect(apiErr.message).toContain("does not weaken");
      expect(apiErr.inequality).toBe("a <= a' and x >= x'");
    }
  });

  it("highlights configuration changes against the parent", async () => {
    const recording = fixture("session.json");
    const { fetchFn } = fixtureFetch(recording.steps);
    const workbench = new Workbench(new ApiClient("", fetchFn));
    await workbench.init();
    await workbench.loadProblem("mis3", fixture("mis3.problem.json").text);
    const reState = await workbench.applyRe();
    const html = renderConstraints(reState, workbench.parent);
    expect(html).toContain("added");
    const diff = diffLines(reState.text ?? "", workbench.parent?.text ?? null);
    expect(diff.some((d) => d.mark === "added")).toBe(true);
    expect(diff.some((d) => d.mark === "removed")).toBe(true);
  });
});
