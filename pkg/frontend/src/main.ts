/** App wiring: bundle picker, canvas, diagnostics strip, toasts. */

import { ApiError, Client } from './api';
import { canvasToPixel, compositeMask, drawMarkers } from './overlay';
import { applyClick, applyUndo, newSession, maskArea, UiSession } from './session';

const SCALE = 8;

const client = new Client();
let session: UiSession | null = null;
let baseImage: HTMLImageElement | null = null;

const canvas = document.getElementById('view') as HTMLCanvasElement;
const bundleSelect = document.getElementById('bundle') as HTMLSelectElement;
const gtSelect = document.getElementById('gt') as HTMLSelectElement;
const startBtn = document.getElementById('start') as HTMLButtonElement;
const undoBtn = document.getElementById('undo') as HTMLButtonElement;
const diag = document.getElementById('diagnostics') as HTMLElement;
const toastEl = document.getElementById('toast') as HTMLElement;

function toast(msg: string): void {
  toastEl.textContent = msg;
  toastEl.classList.add('show');
  setTimeout(() => toastEl.classList.remove('show'), 3000);
}

function renderDiagnostics(): void {
  if (!session) {
    diag.textContent = '';
    return;
  }
  const d = session.diagnostics;
  const parts = [
    `clicks ${session.clicks.length}`,
    `area ${maskArea(session)}`,
    d.fallbackUsed ? 'fallback' : '',
    d.pass2Triggered ? 'guard intervened' : '',
    d.iou !== null ? `iou ${d.iou.toFixed(3)}` : '',
  ];
  diag.textContent = parts.filter(Boolean).join(' · ');
}

function render(): void {
  if (!session || !baseImage) return;
  const { width, height } = session;
  const off = document.createElement('canvas');
  off.width = width;
  off.height = height;
  const octx = off.getContext('2d')!;
  octx.drawImage(baseImage, 0, 0);
  const frame = octx.getImageData(0, 0, width, height);
  frame.data.set(compositeMask(frame.data as unknown as Uint8ClampedArray, session.mask));
  octx.putImageData(frame, 0, 0);

  canvas.width = width * SCALE;
  canvas.height = height * SCALE;
  const ctx = canvas.getContext('2d')!;
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
  drawMarkers(ctx, session.clicks, SCALE);
  renderDiagnostics();
  undoBtn.disabled = session.clicks.length === 0 || session.inFlight;
}

async function start(): Promise<void> {
  try {
    const gtId = gtSelect.value || undefined;
    const info = await client.createSession(bundleSelect.value, gtId);
    session = newSession(info.session_id, info.image_meta.height, info.image_meta.width);
    baseImage = new Image();
    baseImage.onload = render;
    baseImage.src = client.imageUrl(info.session_id);
  } catch (e) {
    toast(e instanceof ApiError ? `server: ${e.message}` : String(e));
  }
}

async function onCanvasClick(ev: MouseEvent): Promise<void> {
  if (!session || session.inFlight) return; // one mutation in flight at a time
  const rect = canvas.getBoundingClientRect();
  const { x, y } = canvasToPixel(ev.clientX - rect.left, ev.clientY - rect.top,
                                 SCALE, session.width, session.height);
  // left click = foreground, right click / ctrl / alt = background
  const label: 0 | 1 = ev.button === 2 || ev.ctrlKey || ev.altKey ? 0 : 1;
  session = { ...session, inFlight: true };
  render();
  try {
    const res = await client.click(session.sessionId, x, y, label);
    session = applyClick(session, { x, y, label }, res);
  } catch (e) {
    session = { ...session, inFlight: false };
    toast(e instanceof ApiError ? `server: ${e.message}` : String(e));
  }
  render();
}

async function onUndo(): Promise<void> {
  if (!session || session.inFlight || session.clicks.length === 0) return;
  session = { ...session, inFlight: true };
  render();
  try {
    const res = await client.undo(session.sessionId);
    session = applyUndo(session, res);
  } catch (e) {
    session = { ...session, inFlight: false };
    toast(e instanceof ApiError ? `server: ${e.message}` : String(e));
  }
  render();
}

async function init(): Promise<void> {
  try {
    const { bundles } = await client.listBundles();
    for (const b of bundles) {
      const opt = document.createElement('option');
      opt.value = b.bundle_id;
      opt.textContent = `${b.bundle_id} (${b.width}x${b.height})`;
      bundleSelect.appendChild(opt);
    }
    bundleSelect.onchange = () => {
      gtSelect.innerHTML = '<option value="">no ground truth</option>';
      const info = bundles.find(b => b.bundle_id === bundleSelect.value);
      for (const g of info?.gt_ids ?? []) {
        const opt = document.createElement('option');
        opt.value = g;
        opt.textContent = g;
        gtSelect.appendChild(opt);
      }
    };
    bundleSelect.dispatchEvent(new Event('change'));
  } catch (e) {
    toast(`could not list bundles: ${e instanceof ApiError ? e.message : e}`);
  }
  startBtn.onclick = start;
  undoBtn.onclick = onUndo;
  canvas.addEventListener('mousedown', onCanvasClick);
  canvas.addEventListener('contextmenu', ev => ev.preventDefault());
}

init();
