// Serialize a scene to standalone SVG markup. Item order is paint order.

import type { Scene, SceneItem } from "./scene.js";

function escapeText(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function dataAttrs(item: SceneItem): string {
  const parts = [` data-role="${item.role}"`];
  for (const [key, value] of Object.entries(item.data ?? {})) {
    parts.push(` data-${key.toLowerCase()}="${escapeText(String(value))}"`);
  }
  return parts.join("");
}

function itemToSvg(item: SceneItem): string {
  const opacity = item.opacity !== undefined ? ` opacity="${item.opacity}"` : "";
  if (item.kind === "rect") {
    const stroke = item.stroke
      ? ` stroke="${item.stroke}" stroke-width="${item.strokeWidth ?? 1}"`
      : "";
    return (
      `<rect x="${item.x}" y="${item.y}" width="${item.width}" height="${item.height}"` +
      ` fill="${item.fill}"${stroke}${opacity}${dataAttrs(item)}/>`
    );
  }
  if (item.kind === "path") {
    return (
      `<path d="${item.d}" fill="none" stroke="${item.stroke}"` +
      ` stroke-width="${item.strokeWidth}"${opacity}${dataAttrs(item)}/>`
    );
  }
  const anchor = item.anchor ? ` text-anchor="${item.anchor}"` : "";
  return (
    `<text x="${item.x}" y="${item.y}" font-size="${item.size}"` +
    ` fill="${item.fill}"${anchor}${opacity}${dataAttrs(item)}>` +
    `${escapeText(item.text)}</text>`
  );
}

export function sceneToSvg(scene: Scene): string {
  const body = scene.items.map(itemToSvg).join("\n  ");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}"` +
    ` height="${scene.height}" viewBox="0 0 ${scene.width} ${scene.height}"` +
    ` font-family="sans-serif">\n  ${body}\n</svg>`
  );
}
