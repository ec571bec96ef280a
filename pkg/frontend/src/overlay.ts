/** Mask compositing and click markers. Buffer-level, canvas-agnostic. */

import type { ClickMarker } from './session';

export const MASK_TINT: [number, number, number, number] = [80, 170, 255, 110];
export const FG_COLOR = 'rgb(40, 200, 80)';
export const BG_COLOR = 'rgb(230, 60, 60)';

/** Semi-transparent tint over foreground pixels; background untouched. */
export function compositeMask(
  rgba: Uint8ClampedArray, mask: Uint8Array,
  tint: [number, number, number, number] = MASK_TINT,
): Uint8ClampedArray {
  if (rgba.length !== mask.length * 4) {
    throw new Error(`rgba length ${rgba.length} does not match mask ${mask.length}`);
  }
  const out = new Uint8ClampedArray(rgba);
  const [tr, tg, tb, ta] = tint;
  const alpha = ta / 255;
  for (let i = 0; i < mask.length; i++) {
    if (!mask[i]) continue;
    const o = i * 4;
    out[o] = Math.round(rgba[o] * (1 - alpha) + tr * alpha);
    out[o + 1] = Math.round(rgba[o + 1] * (1 - alpha) + tg * alpha);
    out[o + 2] = Math.round(rgba[o + 2] * (1 - alpha) + tb * alpha);
  }
  return out;
}

export function drawMarkers(ctx: CanvasRenderingContext2D, clicks: ClickMarker[], scale: number): void {
  for (const c of clicks) {
    ctx.beginPath();
    ctx.arc((c.x + 0.5) * scale, (c.y + 0.5) * scale, Math.max(3, scale * 0.4), 0, 2 * Math.PI);
    ctx.fillStyle = c.label === 1 ? FG_COLOR : BG_COLOR;
    ctx.fill();
    ctx.lineWidth = 1.5;
    ctx.strokeStyle = 'white';
    ctx.stroke();
  }
}

/** Canvas position -> image pixel, clamped to the grid. */
export function canvasToPixel(
  cx: number, cy: number, scale: number, width: number, height: number,
): { x: number; y: number } {
  const x = Math.min(Math.max(Math.floor(cx / scale), 0), width - 1);
  const y = Math.min(Math.max(Math.floor(cy / scale), 0), height - 1);
  return { x, y };
}
