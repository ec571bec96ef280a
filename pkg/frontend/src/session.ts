/**
 * Client-side session state: a pure view over server responses.
 *
 * The reducer only records what the server said; it never edits the mask.
 * Keeping it free of DOM and fetch makes replay directly comparable to a
 * library-level session.
 */

import { decodeRle } from './rle';
import type { MaskResponse } from './api';

export interface ClickMarker {
  x: number;
  y: number;
  label: 0 | 1;
}

export interface Diagnostics {
  fallbackUsed: boolean;
  pass2Triggered: boolean;
  iou: number | null;
}

export interface UiSession {
  sessionId: string;
  height: number;
  width: number;
  mask: Uint8Array;          // decoded, row-major, 0/1
  clicks: ClickMarker[];
  diagnostics: Diagnostics;
  inFlight: boolean;
}

export function newSession(sessionId: string, height: number, width: number): UiSession {
  return {
    sessionId,
    height,
    width,
    mask: new Uint8Array(height * width),
    clicks: [],
    diagnostics: { fallbackUsed: false, pass2Triggered: false, iou: null },
    inFlight: false,
  };
}

function withResponse(s: UiSession, res: MaskResponse): UiSession {
  if (res.height !== s.height || res.width !== s.width) {
    throw new Error(`mask ${res.height}x${res.width} does not match image ${s.height}x${s.width}`);
  }
  return {
    ...s,
    mask: decodeRle(res.mask_rle, res.height, res.width),
    diagnostics: {
      fallbackUsed: res.fallback_used,
      pass2Triggered: res.pass2_triggered,
      iou: res.iou ?? null,
    },
    inFlight: false,
  };
}

export function applyClick(s: UiSession, click: ClickMarker, res: MaskResponse): UiSession {
  return { ...withResponse(s, res), clicks: [...s.clicks, click] };
}

export function applyUndo(s: UiSession, res: MaskResponse): UiSession {
  return { ...withResponse(s, res), clicks: s.clicks.slice(0, -1) };
}

export function maskArea(s: UiSession): number {
  let n = 0;
  for (const v of s.mask) n += v;
  return n;
}
