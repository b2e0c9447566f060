// Debug line chart: one polyline per series (average gradient magnitude and
// average relative weight change per layer). Each series is normalized to
// its own maximum; the label carries the raw peak so scales stay readable.

import type { DebugSeries, SeriesPoint } from "./types.js";
import type { SceneItem } from "./scene.js";

export const SERIES_COLORS: Record<string, string> = {
  avgGradient: "#4c72b0",
  avgRelChange: "#dd8452",
};

function polyline(points: [number, number][]): string {
  return points
    .map(([x, y], i) => `${i === 0 ? "M" : "L"} ${x} ${y}`)
    .join(" ");
}

function seriesItems(
  name: string,
  series: SeriesPoint[],
  index: number,
  x: number,
  y: number,
  width: number,
  height: number,
): SceneItem[] {
  if (series.length === 0) return [];
  const color = SERIES_COLORS[name] ?? "#444444";
  const max = Math.max(...series.map((p) => p.value), 0);
  const step = series.length > 1 ? width / (series.length - 1) : 0;
  const points: [number, number][] = series.map((p, i) => {
    const t = max > 0 ? p.value / max : 0;
    return [x + i * step, y + height - t * height];
  });
  return [
    {
      kind: "path",
      d: polyline(points),
      stroke: color,
      strokeWidth: 1.5,
      role: "chart-line",
      data: { series: name, count: series.length, max },
    },
    {
      kind: "text",
      x,
      y: y - 6 - 12 * index,
      text: `${name} (peak ${max.toExponential(2)})`,
      size: 10,
      fill: color,
      role: "chart-label",
      data: { series: name },
    },
  ];
}

export function buildChart(
  series: DebugSeries,
  x: number,
  y: number,
  width: number,
  height: number,
): SceneItem[] {
  const items: SceneItem[] = [
    {
      kind: "path",
      d: `M ${x} ${y} L ${x} ${y + height} L ${x + width} ${y + height}`,
      stroke: "#999999",
      strokeWidth: 1,
      role: "chart-frame",
    },
  ];
  items.push(...seriesItems("avgGradient", series.avgGradient, 0, x, y, width, height));
  items.push(...seriesItems("avgRelChange", series.avgRelChange, 1, x, y, width, height));
  const layers = series.avgGradient.length > 0 ? series.avgGradient : series.avgRelChange;
  const step = layers.length > 1 ? width / (layers.length - 1) : 0;
  layers.forEach((p, i) => {
    items.push({
      kind: "text",
      x: x + i * step,
      y: y + height + 12,
      text: p.layer,
      size: 9,
      fill: "#666666",
      anchor: "middle",
      role: "chart-axis-label",
      data: { layer: p.layer },
    });
  });
  return items;
}
