// Wire types for the layout.v1 document and the /v1 API envelopes.
// The server serializes canonically (sorted keys, compact separators), so two
// documents are semantically equal exactly when their JSON bytes match.

export type Facet = "features" | "matrix" | "contribution";
export type EdgeFacetKind = "weight" | "gradient" | "relativeChange";
export type Sign = "positive" | "negative";

export interface LayoutParams {
  method: string;
  k: number | null;
  bandwidth: number | null;
  seed: number;
  reprCount: number;
  nPack: number;
  hkLimit: number;
  tau: number | null;
  stop: number | null;
  edgeFacet: EdgeFacetKind;
  importanceMode: string;
}

export interface FacetState {
  facet: Facet;
  classes: number[] | null;
  quantile: number;
}

export interface Column {
  layer: string;
  x: number;
  clusters: string[];
}

export interface Bounds {
  x: number;
  y: number;
  width: number;
  height: number;
}

// Packed feature positions are in grid units; the grid is width x height
// cells and each rect covers side x side cells at (x, y).
export interface PackedRect {
  neuron: string;
  side: number;
  x: number;
  y: number;
  scale: number;
}

export interface Packing {
  width: number;
  height: number;
  utilization: number;
  rects: PackedRect[];
}

export interface ActivationMatrix {
  rows: string[];
  cols: string[];
  values: number[][];
  objective: number;
}

export interface Contribution {
  values: number[];
}

export interface ClusterNode {
  layer: string;
  bounds: Bounds;
  members: string[];
  representatives: string[];
  packing: Packing;
  matrix: ActivationMatrix;
  contribution: Contribution | null;
}

export interface Bicluster {
  id: string;
  sign: Sign;
  anchor: number;
  inputs: string[];
  outputs: string[];
  pairs: [string, string][];
  posNegRatio: number;
}

export interface GapNode {
  id: string;
  bicluster: string;
  x: number;
  y: number;
  width: number;
  height: number;
  posNegRatio: number;
}

// side "in"/"out" curves belong to a bicluster; "direct" curves are residual
// cluster-to-cluster edges with bicluster null. hidden marks residuals whose
// weight fell below the stop threshold.
export interface Curve {
  bicluster: string | null;
  cluster: string;
  side: "in" | "out" | "direct";
  sign: Sign;
  weight: number;
  points: [number, number][];
  hidden: boolean;
}

export interface GapEdgeFacet {
  kind: EdgeFacetKind;
  values: Record<string, number>;
}

export interface Gap {
  gap: number;
  left: string;
  right: string;
  tau: number;
  stop: number;
  biclusters: Bicluster[];
  nodes: GapNode[];
  curves: Curve[];
  edgeFacet: GapEdgeFacet;
}

export interface HighlightSet {
  highlighted: string[];
  translucent: string[];
}

export interface SeriesPoint {
  layer: string;
  value: number;
}

export interface DebugSeries {
  avgGradient: SeriesPoint[];
  avgRelChange: SeriesPoint[];
}

export interface LayoutDocument {
  schema: "layout.v1";
  snapshot: string;
  classes: string[];
  params: LayoutParams;
  facetState: FacetState;
  columns: Column[];
  clusterNodes: Record<string, ClusterNode>;
  gaps: Gap[];
  highlight: Record<string, HighlightSet>;
  debugSeries: DebugSeries | null;
}

// Session commands, one interface per interaction.

export interface MoveNeuronCommand {
  type: "moveNeuron";
  neuron: string;
  target: string; // existing cluster id or "new"
}

export interface ResizeClusterCommand {
  type: "resizeCluster";
  cluster: string;
  count: number;
}

export interface SetFacetCommand {
  type: "setFacet";
  facet: Facet;
}

export interface SelectClassesCommand {
  type: "selectClasses";
  classes: number[] | null;
  quantile?: number;
}

export interface SetTauCommand {
  type: "setTau";
  tau?: number | null;
  stop?: number | null;
}

export interface SetEdgeFacetCommand {
  type: "setEdgeFacet";
  edgeFacet: EdgeFacetKind;
}

export type Command =
  | MoveNeuronCommand
  | ResizeClusterCommand
  | SetFacetCommand
  | SelectClassesCommand
  | SetTauCommand
  | SetEdgeFacetCommand;

// API envelopes.

export interface SessionSnapshot {
  id: string;
  version: number;
  document: LayoutDocument;
}

export interface CommandResult {
  version: number;
  document: LayoutDocument;
}

export interface DebugSeriesResponse {
  kind: string;
  series: SeriesPoint[];
}

export interface Patch {
  imageId: string;
  activationScore: number;
  pixels?: number[][]; // grayscale rows, 0..1
}

export interface PatchesResponse {
  neuron: string;
  patches: Patch[];
}

export interface LayoutQuery {
  facet?: Facet;
  classes?: string; // comma-separated indices
  quantile?: number;
  tau?: number;
  stop?: number;
  edgeFacet?: EdgeFacetKind;
  method?: string;
  k?: number;
  bandwidth?: number;
  seed?: number;
}
