// Deterministic stand-in glyphs for neurons whose snapshots carry no patch
// pixels: a 5x5 mirrored cell pattern plus a stable color, both keyed only
// by the neuron id so every render of the same document looks identical.

export interface Identicon {
  cells: boolean[][]; // 5 rows x 5 cols, mirrored around the center column
  color: string;
}

export const IDENTICON_GRID = 5;

export function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export function identicon(id: string): Identicon {
  // 5 rows x 3 independent columns = 15 bits; columns 3 and 4 mirror 1 and 0
  let bits = fnv1a(id);
  const cells: boolean[][] = [];
  for (let row = 0; row < IDENTICON_GRID; row++) {
    const half: boolean[] = [];
    for (let col = 0; col < 3; col++) {
      half.push((bits & 1) === 1);
      bits >>>= 1;
    }
    cells.push([half[0], half[1], half[2], half[1], half[0]]);
  }
  const hue = fnv1a(id + "#hue") % 360;
  return { cells, color: `hsl(${hue}, 55%, 45%)` };
}
