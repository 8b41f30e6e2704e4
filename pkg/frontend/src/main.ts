/** Browser entry point: wires the workbench and wizard to the DOM.
 *
 * At most one long-running job is in flight at a time; the cancel button
 * aborts it through the service's job handle.
 */

import { ApiClient, ApiError } from "./api.js";
import { renderConstraints, renderDiagram, renderDictionary, renderHistory } from "./views.js";
import { runWizard, renderWizard, renderWizardFailure } from "./wizard.js";
import { Workbench, ViewMode } from "./workbench.js";

const api = new ApiClient("");
const workbench = new Workbench(api);

const el = (id: string): HTMLElement => {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found;
};

let activeJob: string | null = null;

function showError(err: unknown): void {
  const box = el("error");
  if (err instanceof ApiError) {
    const detail = err.inequality ? ` (failing: ${err.inequality})` : "";
    box.textContent = `${err.message}${detail}`;
  } else {
    box.textContent = String(err);
  }
  box.classList.remove("hidden");
}

function clearError(): void {
  el("error").classList.add("hidden");
}

function redraw(): void {
  const state = workbench.current;
  el("history").innerHTML = renderHistory(workbench.historyNodes(), workbench.selected);
  const view = (document.querySelector("input[name=view]:checked") as HTMLInputElement | null)
    ?.value as ViewMode | undefined;
  const mode: ViewMode = view ?? "constraints";
  const panel = el("panel");
  if (!state) {
    panel.innerHTML = `<p class="empty">load a problem to begin</p>`;
    return;
  }
  if (mode === "constraints") panel.innerHTML = renderConstraints(state, workbench.parent);
  else if (mode === "dictionary") panel.innerHTML = renderDictionary(state);
  else if (mode === "diagram") panel.innerHTML = renderDiagram(state);
  else panel.innerHTML = renderHistory(workbench.historyNodes(), workbench.selected);
  for (const button of document.querySelectorAll<HTMLButtonElement>("button.node")) {
    button.addEventListener("click", () => {
      workbench.select(Number(button.dataset["node"]));
      redraw();
    });
  }
}

async function guarded(action: () => Promise<unknown>): Promise<void> {
  clearError();
  try {
    await action();
  } catch (err) {
    showError(err);
  }
  redraw();
}

export function boot(): void {
  void guarded(() => workbench.init());

  el("load").addEventListener("click", () =>
    guarded(() => {
      const text = (el("problem-text") as HTMLTextAreaElement).value;
      const name = (el("problem-name") as HTMLInputElement).value || "problem";
      return workbench.loadProblem(name, text);
    }),
  );
  el("step-re").addEventListener("click", () => guarded(() => workbench.applyRe()));
  el("step-rere").addEventListener("click", () => guarded(() => workbench.applyRere()));
  el("step-diagram").addEventListener("click", () =>
    guarded(() => {
      const side = (el("diagram-side") as HTMLSelectElement).value as "node" | "edge";
      return workbench.applyDiagram(side);
    }),
  );
  el("step-rename").addEventListener("click", () =>
    guarded(() => {
      const raw = (el("rename-table") as HTMLTextAreaElement).value || "{}";
      return workbench.applyRename(JSON.parse(raw) as Record<string, string>);
    }),
  );
  el("step-undo").addEventListener("click", () => {
    workbench.undo();
    redraw();
  });
  for (const radio of document.querySelectorAll("input[name=view]")) {
    radio.addEventListener("change", redraw);
  }

  el("wizard-run").addEventListener("click", () =>
    guarded(async () => {
      const delta = Number((el("wizard-delta") as HTMLInputElement).value);
      const x0 = Number((el("wizard-x0") as HTMLInputElement).value);
      const epsilon = Number((el("wizard-epsilon") as HTMLInputElement).value);
      el("wizard-out").innerHTML = `<p>building certificate...</p>`;
      const run = await runWizard(api, delta, x0, epsilon, {
        onJob: (id) => {
          activeJob = id;
        },
      });
      activeJob = null;
      el("wizard-out").innerHTML = run.view
        ? renderWizard(run.view)
        : renderWizardFailure(run.error ?? "unknown failure");
    }),
  );
  el("wizard-cancel").addEventListener("click", () =>
    guarded(async () => {
      if (activeJob) await api.cancelJob(activeJob);
    }),
  );
}

if (typeof document !== "undefined" && document.getElementById("panel")) {
  boot();
}
