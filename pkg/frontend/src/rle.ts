/**
 * Row-major run-length codec for binary masks.
 *
 * Wire format (shared with the server): run lengths alternating
 * background/foreground, first run always background (possibly 0),
 * runs summing to height*width.
 */

export function decodeRle(runs: number[], height: number, width: number): Uint8Array {
  const total = height * width;
  let sum = 0;
  for (const r of runs) {
    if (!Number.isInteger(r) || r < 0) throw new Error(`bad run length ${r}`);
    sum += r;
  }
  if (sum !== total) throw new Error(`runs sum to ${sum}, expected ${total}`);
  const flat = new Uint8Array(total);
  let pos = 0;
  let fg = false;
  for (const r of runs) {
    if (fg) flat.fill(1, pos, pos + r);
    pos += r;
    fg = !fg;
  }
  return flat;
}

export function encodeRle(flat: Uint8Array): number[] {
  if (flat.length === 0) return [];
  const runs: number[] = [];
  if (flat[0]) runs.push(0); // first run is always background
  let current = flat[0] ? 1 : 0;
  let count = 0;
  for (const v of flat) {
    const bit = v ? 1 : 0;
    if (bit === current) {
      count += 1;
    } else {
      runs.push(count);
      current = bit;
      count = 1;
    }
  }
  runs.push(count);
  return runs;
}
