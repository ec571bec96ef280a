/** Typed client for the /v1 HTTP API. The client never computes masks. */

export interface BundleInfo {
  bundle_id: string;
  height: number;
  width: number;
  gt_ids: string[];
}

export interface SessionInfo {
  session_id: string;
  image_meta: { height: number; width: number; bundle_id: string; gt_id: string | null };
}

export interface MaskResponse {
  mask_rle: number[];
  area: number;
  height: number;
  width: number;
  fallback_used: boolean;
  pass2_triggered: boolean;
  iou?: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function unwrap<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      detail = body.error ?? JSON.stringify(body);
    } catch {
      /* non-JSON error body: keep statusText */
    }
    throw new ApiError(res.status, detail);
  }
  return res.json() as Promise<T>;
}

export class Client {
  constructor(private base = '') {}

  listBundles(): Promise<{ bundles: BundleInfo[] }> {
    return fetch(`${this.base}/v1/bundles`).then(r => unwrap(r));
  }

  createSession(bundleId: string, gtId?: string): Promise<SessionInfo> {
    return fetch(`${this.base}/v1/sessions`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ bundle_id: bundleId, gt_id: gtId ?? null }),
    }).then(r => unwrap(r));
  }

  click(sid: string, x: number, y: number, label: 0 | 1): Promise<MaskResponse> {
    return fetch(`${this.base}/v1/sessions/${sid}/clicks`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ x, y, label }),
    }).then(r => unwrap(r));
  }

  undo(sid: string): Promise<MaskResponse> {
    return fetch(`${this.base}/v1/sessions/${sid}/undo`, { method: 'POST' })
      .then(r => unwrap(r));
  }

  imageUrl(sid: string): string {
    return `${this.base}/v1/sessions/${sid}/image.png`;
  }
}
