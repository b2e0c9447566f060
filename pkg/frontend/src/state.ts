// Client-side session state. The server owns the document; this class
// mirrors its version, queues interaction commands one at a time, and on a
// version conflict refetches the authoritative state instead of retrying.

import { ApiClient, ApiError } from "./client.js";
import type {
  Command,
  EdgeFacetKind,
  Facet,
  LayoutDocument,
} from "./types.js";
import type { RenderView } from "./scene.js";

interface VersionedDocument {
  version: number;
  document: LayoutDocument;
}

export class SessionView {
  sessionId: string | null = null;
  version = -1;
  document: LayoutDocument | null = null;
  undoDepth = 0;

  // purely client-side UX state, never sent to the server
  hoveredNeuron: string | null = null;
  selectedNeuron: string | null = null;
  showResiduals = false;
  patches: Record<string, number[][]> = {};

  onChange: (() => void) | null = null;

  private queue: Promise<unknown> = Promise.resolve();

  constructor(private client: ApiClient) {}

  async open(snapshotId: string): Promise<void> {
    const session = await this.client.createSession(snapshotId);
    this.sessionId = session.id;
    this.apply(session);
  }

  // server-derived mirrors
  get facet(): Facet {
    return this.document?.facetState.facet ?? "features";
  }

  get selectedClasses(): number[] | null {
    return this.document?.facetState.classes ?? null;
  }

  get quantile(): number {
    return this.document?.facetState.quantile ?? 1.0;
  }

  get tau(): number | null {
    return this.document?.params.tau ?? null;
  }

  get stop(): number | null {
    return this.document?.params.stop ?? null;
  }

  get edgeFacet(): EdgeFacetKind {
    return this.document?.params.edgeFacet ?? "weight";
  }

  renderView(): RenderView {
    return {
      showResiduals: this.showResiduals,
      hoveredNeuron: this.hoveredNeuron,
      selectedNeuron: this.selectedNeuron,
      patches: this.patches,
    };
  }

  private apply(result: VersionedDocument): void {
    this.version = result.version;
    this.document = result.document;
    if (this.onChange) this.onChange();
  }

  private requireSession(): string {
    if (this.sessionId === null) throw new Error("session not opened");
    return this.sessionId;
  }

  // at most one command is in flight; responses apply in issue order
  private enqueue<T>(task: () => Promise<T>): Promise<T> {
    const next = this.queue.then(task, task);
    this.queue = next.catch(() => undefined);
    return next;
  }

  send(command: Command): Promise<void> {
    return this.enqueue(async () => {
      const sid = this.requireSession();
      try {
        const result = await this.client.sendCommand(sid, command, this.version);
        this.apply(result);
        this.undoDepth += 1;
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          // another editor advanced the session: adopt their state, drop
          // the command, and let the user decide whether to repeat it
          this.apply(await this.client.getSession(sid));
          return;
        }
        throw err;
      }
    });
  }

  undo(): Promise<void> {
    return this.enqueue(async () => {
      const sid = this.requireSession();
      try {
        const result = await this.client.undo(sid);
        this.apply(result);
        this.undoDepth = Math.max(0, this.undoDepth - 1);
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          this.apply(await this.client.getSession(sid));
          return;
        }
        throw err;
      }
    });
  }

  moveNeuron(neuron: string, target: string): Promise<void> {
    return this.send({ type: "moveNeuron", neuron, target });
  }

  resizeCluster(cluster: string, count: number): Promise<void> {
    return this.send({ type: "resizeCluster", cluster, count });
  }

  setFacet(facet: Facet): Promise<void> {
    return this.send({ type: "setFacet", facet });
  }

  selectClasses(classes: number[] | null, quantile?: number): Promise<void> {
    return this.send({ type: "selectClasses", classes, ...(quantile !== undefined ? { quantile } : {}) });
  }

  setTau(tau: number | null, stop?: number | null): Promise<void> {
    return this.send({ type: "setTau", tau, ...(stop !== undefined ? { stop } : {}) });
  }

  setEdgeFacet(edgeFacet: EdgeFacetKind): Promise<void> {
    return this.send({ type: "setEdgeFacet", edgeFacet });
  }

  // UX-only updates re-render locally without a server round trip
  setHover(neuron: string | null): void {
    this.hoveredNeuron = neuron;
    if (this.onChange) this.onChange();
  }

  setSelection(neuron: string | null): void {
    this.selectedNeuron = neuron;
    if (this.onChange) this.onChange();
  }

  toggleResiduals(): void {
    this.showResiduals = !this.showResiduals;
    if (this.onChange) this.onChange();
  }

  async loadPatches(neuron: string): Promise<void> {
    if (this.document === null || neuron in this.patches) return;
    const resp = await this.client.getPatches(this.document.snapshot, neuron);
    const best = resp.patches.find((p) => p.pixels !== undefined);
    if (best && best.pixels) {
      this.patches[neuron] = best.pixels;
      if (this.onChange) this.onChange();
    }
  }
}
