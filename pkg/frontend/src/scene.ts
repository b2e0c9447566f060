// Pure scene construction: LayoutDocument in, flat list of drawable items
// out. All geometry (cluster bounds, packed positions, curve control points,
// in-between node placement) comes from the server; the only arithmetic here
// maps grid units and matrix indices affinely into the boxes the server gave
// us. No clustering, packing, ordering, or routing happens client-side.

import type {
  ClusterNode,
  Curve,
  Gap,
  LayoutDocument,
} from "./types.js";
import {
  CLUSTER_STROKE,
  SELECTION_STROKE,
  TRANSLUCENT_OPACITY,
  activationColor,
  divergingColor,
  grayColor,
  signColor,
} from "./colors.js";
import { IDENTICON_GRID, identicon } from "./identicon.js";
import { buildChart } from "./chart.js";

export type SceneData = Record<string, string | number | boolean | null>;

export interface SceneRect {
  kind: "rect";
  x: number;
  y: number;
  width: number;
  height: number;
  fill: string;
  stroke?: string;
  strokeWidth?: number;
  opacity?: number;
  role: string;
  data?: SceneData;
}

export interface ScenePath {
  kind: "path";
  d: string;
  stroke: string;
  strokeWidth: number;
  opacity?: number;
  role: string;
  data?: SceneData;
}

export interface SceneText {
  kind: "text";
  x: number;
  y: number;
  text: string;
  size: number;
  fill: string;
  anchor?: "start" | "middle" | "end";
  opacity?: number;
  role: string;
  data?: SceneData;
}

export type SceneItem = SceneRect | ScenePath | SceneText;

export interface Scene {
  width: number;
  height: number;
  items: SceneItem[];
}

// Everything the renderer needs beyond the document itself.
export interface RenderView {
  showResiduals: boolean;
  hoveredNeuron: string | null;
  selectedNeuron: string | null;
  patches: Record<string, number[][]>; // neuron id -> grayscale pixel rows
}

export function defaultView(): RenderView {
  return { showResiduals: false, hoveredNeuron: null, selectedNeuron: null, patches: {} };
}

const SCENE_MARGIN = 40;
const CHART_WIDTH = 360;
const CHART_HEIGHT = 120;
const MIN_CURVE_WIDTH = 1;
const MAX_CURVE_WIDTH = 5;

function translucencyByNeuron(doc: LayoutDocument): Map<string, number> {
  const opacity = new Map<string, number>();
  for (const layer of Object.keys(doc.highlight)) {
    for (const neuron of doc.highlight[layer].translucent) {
      opacity.set(neuron, TRANSLUCENT_OPACITY);
    }
  }
  return opacity;
}

function neuronStroke(neuron: string, view: RenderView): Pick<SceneRect, "stroke" | "strokeWidth"> {
  if (neuron === view.selectedNeuron) return { stroke: SELECTION_STROKE, strokeWidth: 2 };
  if (neuron === view.hoveredNeuron) return { stroke: "#888888", strokeWidth: 1.5 };
  return {};
}

function clusterBox(id: string, node: ClusterNode): SceneRect {
  const b = node.bounds;
  return {
    kind: "rect",
    x: b.x,
    y: b.y,
    width: b.width,
    height: b.height,
    fill: "none",
    stroke: CLUSTER_STROKE,
    strokeWidth: 1,
    role: "cluster-box",
    data: { cluster: id, layer: node.layer, members: node.members.length },
  };
}

function featureItems(
  id: string,
  node: ClusterNode,
  view: RenderView,
  opacity: Map<string, number>,
): SceneItem[] {
  const items: SceneItem[] = [];
  const b = node.bounds;
  const p = node.packing;
  if (p.width <= 0 || p.height <= 0) return items;
  // uniform unit keeps the server's non-overlap guarantee intact
  const unit = Math.min(b.width / p.width, b.height / p.height);
  for (const rect of p.rects) {
    const x = b.x + rect.x * unit;
    const y = b.y + rect.y * unit;
    const size = rect.side * unit;
    const alpha = opacity.get(rect.neuron);
    const base: SceneData = { neuron: rect.neuron, cluster: id, scale: rect.scale };
    const pixels = view.patches[rect.neuron];
    items.push({
      kind: "rect",
      x,
      y,
      width: size,
      height: size,
      fill: "#f4f4f4",
      ...neuronStroke(rect.neuron, view),
      ...(alpha !== undefined ? { opacity: alpha } : {}),
      role: "patch",
      data: base,
    });
    if (pixels && pixels.length > 0) {
      // real patch pixels, drawn as a small grayscale grid
      const rows = pixels.length;
      const cols = pixels[0].length;
      const cw = size / cols;
      const rh = size / rows;
      for (let r = 0; r < rows; r++) {
        for (let c = 0; c < cols; c++) {
          items.push({
            kind: "rect",
            x: x + c * cw,
            y: y + r * rh,
            width: cw,
            height: rh,
            fill: grayColor(pixels[r][c]),
            ...(alpha !== undefined ? { opacity: alpha } : {}),
            role: "patch-pixel",
            data: { neuron: rect.neuron },
          });
        }
      }
    } else {
      // no pixel payload: deterministic glyph keyed by the neuron id
      const glyph = identicon(rect.neuron);
      const inset = size * 0.1;
      const cell = (size - 2 * inset) / IDENTICON_GRID;
      for (let r = 0; r < IDENTICON_GRID; r++) {
        for (let c = 0; c < IDENTICON_GRID; c++) {
          if (!glyph.cells[r][c]) continue;
          items.push({
            kind: "rect",
            x: x + inset + c * cell,
            y: y + inset + r * cell,
            width: cell,
            height: cell,
            fill: glyph.color,
            ...(alpha !== undefined ? { opacity: alpha } : {}),
            role: "patch-cell",
            data: { neuron: rect.neuron },
          });
        }
      }
    }
  }
  return items;
}

function matrixMax(nodes: ClusterNode[]): number {
  let max = 0;
  for (const node of nodes) {
    for (const row of node.matrix.values) {
      for (const v of row) max = Math.max(max, v);
    }
  }
  return max;
}

function matrixItems(
  id: string,
  node: ClusterNode,
  max: number,
  view: RenderView,
  opacity: Map<string, number>,
): SceneItem[] {
  const items: SceneItem[] = [];
  const b = node.bounds;
  const m = node.matrix;
  if (m.rows.length === 0 || m.cols.length === 0) return items;
  const cw = b.width / m.cols.length;
  const rh = b.height / m.rows.length;
  for (let r = 0; r < m.rows.length; r++) {
    const neuron = m.rows[r];
    const alpha = opacity.get(neuron);
    for (let c = 0; c < m.cols.length; c++) {
      items.push({
        kind: "rect",
        x: b.x + c * cw,
        y: b.y + r * rh,
        width: cw,
        height: rh,
        fill: activationColor(m.values[r][c], max),
        ...neuronStroke(neuron, view),
        ...(alpha !== undefined ? { opacity: alpha } : {}),
        role: "matrix-cell",
        data: { neuron, cluster: id, class: m.cols[c], value: m.values[r][c] },
      });
    }
  }
  return items;
}

function contributionItems(id: string, node: ClusterNode, absMax: number): SceneItem[] {
  const items: SceneItem[] = [];
  const contribution = node.contribution;
  if (!contribution) return items;
  const b = node.bounds;
  const cw = b.width / contribution.values.length;
  for (let c = 0; c < contribution.values.length; c++) {
    items.push({
      kind: "rect",
      x: b.x + c * cw,
      y: b.y,
      width: cw,
      height: b.height,
      fill: divergingColor(contribution.values[c], absMax),
      role: "contribution-cell",
      data: { cluster: id, class: c, value: contribution.values[c] },
    });
  }
  return items;
}

// one shared header per layer column; every cluster matrix in a column has
// the same class order
function classHeaderItems(doc: LayoutDocument): SceneItem[] {
  const items: SceneItem[] = [];
  for (const column of doc.columns) {
    if (column.clusters.length === 0) continue;
    const first = doc.clusterNodes[column.clusters[0]];
    const cols = first.matrix.cols;
    if (cols.length === 0) continue;
    const top = Math.min(...column.clusters.map((cid) => doc.clusterNodes[cid].bounds.y));
    const cw = first.bounds.width / cols.length;
    for (let c = 0; c < cols.length; c++) {
      items.push({
        kind: "text",
        x: column.x + (c + 0.5) * cw,
        y: top - 6,
        text: cols[c],
        size: 9,
        fill: "#333333",
        anchor: "middle",
        role: "class-header",
        data: { layer: column.layer, class: cols[c] },
      });
    }
  }
  return items;
}

function betweenNodeItems(gap: Gap): SceneItem[] {
  const items: SceneItem[] = [];
  for (const node of gap.nodes) {
    const greenHeight = node.height * node.posNegRatio;
    if (greenHeight > 0) {
      items.push({
        kind: "rect",
        x: node.x,
        y: node.y,
        width: node.width,
        height: greenHeight,
        fill: signColor("positive"),
        role: "between-node",
        data: { bicluster: node.bicluster, sign: "positive", gap: gap.gap },
      });
    }
    if (greenHeight < node.height) {
      items.push({
        kind: "rect",
        x: node.x,
        y: node.y + greenHeight,
        width: node.width,
        height: node.height - greenHeight,
        fill: signColor("negative"),
        role: "between-node",
        data: { bicluster: node.bicluster, sign: "negative", gap: gap.gap },
      });
    }
  }
  return items;
}

function curvePath(curve: Curve): string {
  const [p0, p1, p2, p3] = curve.points;
  return `M ${p0[0]} ${p0[1]} C ${p1[0]} ${p1[1]}, ${p2[0]} ${p2[1]}, ${p3[0]} ${p3[1]}`;
}

function curveItems(gap: Gap, view: RenderView): SceneItem[] {
  const items: SceneItem[] = [];
  let maxWeight = 0;
  for (const c of gap.curves) maxWeight = Math.max(maxWeight, Math.abs(c.weight));
  for (const curve of gap.curves) {
    const residual = curve.bicluster === null;
    if ((residual || curve.hidden) && !view.showResiduals) continue;
    const t = maxWeight > 0 ? Math.abs(curve.weight) / maxWeight : 0;
    items.push({
      kind: "path",
      d: curvePath(curve),
      stroke: signColor(curve.sign),
      strokeWidth: MIN_CURVE_WIDTH + (MAX_CURVE_WIDTH - MIN_CURVE_WIDTH) * t,
      ...(residual ? { opacity: 0.5 } : {}),
      role: "curve",
      data: {
        bicluster: curve.bicluster,
        cluster: curve.cluster,
        side: curve.side,
        sign: curve.sign,
        hidden: curve.hidden,
        gap: gap.gap,
      },
    });
  }
  return items;
}

export function buildScene(doc: LayoutDocument, view: RenderView = defaultView()): Scene {
  const items: SceneItem[] = [];
  const opacity = translucencyByNeuron(doc);
  const facet = doc.facetState.facet;

  // curves go under the boxes so strokes never obscure node content
  for (const gap of doc.gaps) {
    items.push(...curveItems(gap, view));
    items.push(...betweenNodeItems(gap));
  }

  const nodes = Object.values(doc.clusterNodes);
  const maxByLayer = new Map<string, number>();
  if (facet === "matrix") {
    for (const column of doc.columns) {
      const columnNodes = column.clusters.map((cid) => doc.clusterNodes[cid]);
      maxByLayer.set(column.layer, matrixMax(columnNodes));
    }
  }
  const contribAbsMax = Math.max(
    0,
    ...nodes.flatMap((n) => (n.contribution ? n.contribution.values.map(Math.abs) : [])),
  );

  for (const column of doc.columns) {
    for (const cid of column.clusters) {
      const node = doc.clusterNodes[cid];
      items.push(clusterBox(cid, node));
      if (facet === "features") {
        items.push(...featureItems(cid, node, view, opacity));
      } else if (facet === "matrix") {
        items.push(...matrixItems(cid, node, maxByLayer.get(column.layer) ?? 0, view, opacity));
      } else {
        items.push(...contributionItems(cid, node, contribAbsMax));
      }
    }
    items.push({
      kind: "text",
      x: column.x,
      y: SCENE_MARGIN - 22,
      text: column.layer,
      size: 12,
      fill: "#111111",
      role: "layer-label",
      data: { layer: column.layer },
    });
  }
  if (facet === "matrix") items.push(...classHeaderItems(doc));

  let bottom = 0;
  let right = 0;
  for (const node of nodes) {
    bottom = Math.max(bottom, node.bounds.y + node.bounds.height);
    right = Math.max(right, node.bounds.x + node.bounds.width);
  }
  for (const gap of doc.gaps) {
    for (const n of gap.nodes) bottom = Math.max(bottom, n.y + n.height);
  }

  if (doc.debugSeries) {
    items.push(
      ...buildChart(doc.debugSeries, SCENE_MARGIN, bottom + SCENE_MARGIN, CHART_WIDTH, CHART_HEIGHT),
    );
    bottom += SCENE_MARGIN + CHART_HEIGHT;
    right = Math.max(right, SCENE_MARGIN + CHART_WIDTH);
  }

  return { width: right + SCENE_MARGIN, height: bottom + SCENE_MARGIN, items };
}
