import type { Sign } from "./types.js";

// Positive weights/biclusters are green, negative ones red, everywhere.
export const POSITIVE_COLOR = "#2e8b57";
export const NEGATIVE_COLOR = "#c0392b";
export const TRANSLUCENT_OPACITY = 0.25;
export const CLUSTER_STROKE = "#555555";
export const SELECTION_STROKE = "#1a1a1a";

export function signColor(sign: Sign): string {
  return sign === "positive" ? POSITIVE_COLOR : NEGATIVE_COLOR;
}

function hexChannel(v: number): string {
  const byte = Math.max(0, Math.min(255, Math.round(v)));
  return byte.toString(16).padStart(2, "0");
}

function mix(from: [number, number, number], to: [number, number, number], t: number): string {
  const clamped = Math.max(0, Math.min(1, t));
  const rgb = from.map((f, i) => f + (to[i] - f) * clamped);
  return "#" + rgb.map(hexChannel).join("");
}

const WHITE: [number, number, number] = [255, 255, 255];
const DEEP_BLUE: [number, number, number] = [8, 48, 107];
const DEEP_GREEN: [number, number, number] = [27, 120, 55];
const DEEP_RED: [number, number, number] = [165, 15, 21];

// Sequential white-to-blue scale for (non-negative) activation cells.
export function activationColor(value: number, max: number): string {
  if (max <= 0) return mix(WHITE, DEEP_BLUE, 0);
  return mix(WHITE, DEEP_BLUE, value / max);
}

// Diverging scale for signed values: green above zero, red below.
export function divergingColor(value: number, absMax: number): string {
  if (absMax <= 0) return mix(WHITE, DEEP_GREEN, 0);
  const t = Math.abs(value) / absMax;
  return value >= 0 ? mix(WHITE, DEEP_GREEN, t) : mix(WHITE, DEEP_RED, t);
}

// Grayscale for patch pixels (0 = black, 1 = white).
export function grayColor(value: number): string {
  const byte = hexChannel(255 * Math.max(0, Math.min(1, value)));
  return `#${byte}${byte}${byte}`;
}
