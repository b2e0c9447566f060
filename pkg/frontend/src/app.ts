// Browser entry point: mounts a toolbar plus the SVG scene and translates
// pointer gestures into session commands. All layout geometry comes from the
// server document; this file only wires DOM events to SessionView calls.

import { ApiClient } from "./client.js";
import { SessionView } from "./state.js";
import { buildScene } from "./scene.js";
import { sceneToSvg } from "./svg.js";
import type { EdgeFacetKind, Facet } from "./types.js";

const FACETS: Facet[] = ["features", "matrix", "contribution"];
const EDGE_FACETS: EdgeFacetKind[] = ["weight", "gradient", "relativeChange"];

export interface AppOptions {
  base: string; // API origin, e.g. http://127.0.0.1:8000
  snapshotId: string;
}

function button(label: string, onClick: () => void): HTMLButtonElement {
  const el = document.createElement("button");
  el.textContent = label;
  el.addEventListener("click", onClick);
  return el;
}

function numberInput(
  label: string,
  value: number | null,
  onCommit: (value: number | null) => void,
): HTMLLabelElement {
  const wrap = document.createElement("label");
  wrap.textContent = label + " ";
  const input = document.createElement("input");
  input.type = "number";
  input.step = "any";
  input.style.width = "7em";
  if (value !== null) input.value = String(value);
  input.addEventListener("change", () => {
    onCommit(input.value === "" ? null : Number(input.value));
  });
  wrap.appendChild(input);
  return wrap;
}

export async function mountApp(container: HTMLElement, options: AppOptions): Promise<SessionView> {
  const client = new ApiClient(options.base);
  const view = new SessionView(client);

  const toolbar = document.createElement("div");
  toolbar.style.cssText = "display:flex;gap:12px;align-items:center;flex-wrap:wrap;padding:8px";
  const stage = document.createElement("div");
  const status = document.createElement("span");
  container.replaceChildren(toolbar, stage);

  let selectedCluster: string | null = null;

  const render = () => {
    if (!view.document) return;
    stage.innerHTML = sceneToSvg(buildScene(view.document, view.renderView()));
    status.textContent = `v${view.version} | facet ${view.facet} | undo depth ${view.undoDepth}`;
  };
  view.onChange = render;

  await view.open(options.snapshotId);

  for (const facet of FACETS) {
    toolbar.appendChild(button(facet, () => void view.setFacet(facet)));
  }

  const edgeSelect = document.createElement("select");
  for (const kind of EDGE_FACETS) {
    const opt = document.createElement("option");
    opt.value = kind;
    opt.textContent = kind;
    edgeSelect.appendChild(opt);
  }
  edgeSelect.addEventListener("change", () => {
    void view.setEdgeFacet(edgeSelect.value as EdgeFacetKind);
  });
  toolbar.appendChild(edgeSelect);

  const classBox = document.createElement("span");
  (view.document?.classes ?? []).forEach((name, index) => {
    const label = document.createElement("label");
    const check = document.createElement("input");
    check.type = "checkbox";
    check.dataset.classIndex = String(index);
    check.addEventListener("change", () => {
      const boxes = classBox.querySelectorAll<HTMLInputElement>("input:checked");
      const chosen = Array.from(boxes).map((b) => Number(b.dataset.classIndex));
      void view.selectClasses(chosen.length > 0 ? chosen : null);
    });
    label.append(check, name);
    classBox.appendChild(label);
  });
  toolbar.appendChild(classBox);

  toolbar.appendChild(
    numberInput("tau", view.tau, (value) => void view.setTau(value)),
  );
  toolbar.appendChild(
    numberInput("stop", view.stop, (value) => void view.setTau(view.tau, value)),
  );
  toolbar.appendChild(
    numberInput("representatives", null, (value) => {
      if (selectedCluster !== null && value !== null) {
        void view.resizeCluster(selectedCluster, value);
      }
    }),
  );

  const residualToggle = document.createElement("label");
  const residualCheck = document.createElement("input");
  residualCheck.type = "checkbox";
  residualCheck.addEventListener("change", () => view.toggleResiduals());
  residualToggle.append(residualCheck, "residual edges");
  toolbar.appendChild(residualToggle);

  toolbar.appendChild(button("undo", () => void view.undo()));
  toolbar.appendChild(status);

  // drag a neuron glyph onto another cluster box (or empty space for a new
  // cluster); plain clicks toggle the selection
  let dragNeuron: string | null = null;
  let dragMoved = false;

  const neuronAt = (target: EventTarget | null): string | null => {
    if (!(target instanceof Element)) return null;
    const holder = target.closest("[data-neuron]");
    return holder?.getAttribute("data-neuron") ?? null;
  };

  const clusterAt = (target: EventTarget | null): string | null => {
    if (!(target instanceof Element)) return null;
    const holder = target.closest("[data-cluster]");
    return holder?.getAttribute("data-cluster") ?? null;
  };

  stage.addEventListener("mousedown", (event) => {
    dragNeuron = neuronAt(event.target);
    dragMoved = false;
    const cluster = clusterAt(event.target);
    if (cluster !== null) selectedCluster = cluster;
  });
  stage.addEventListener("mousemove", (event) => {
    if (dragNeuron !== null) dragMoved = true;
    view.setHover(neuronAt(event.target));
  });
  stage.addEventListener("mouseup", (event) => {
    const neuron = dragNeuron;
    dragNeuron = null;
    if (neuron === null) return;
    if (!dragMoved) {
      view.setSelection(view.selectedNeuron === neuron ? null : neuron);
      void view.loadPatches(neuron);
      return;
    }
    const target = clusterAt(event.target);
    void view.moveNeuron(neuron, target ?? "new");
  });

  render();
  return view;
}
