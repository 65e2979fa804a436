// Port-hover inspection popover: previews plus an info table, with wheel
// events forwarded through a kept-alive inspect session.

import type { ApiClient } from "./api.js";
import type { InspectPayload } from "./types.js";

export interface PopoverModel {
  title: string;
  rows: [string, string][];
  images: { label: string; src: string }[];
  error: string | null;
}

export function popoverFromPayload(processor: string, port: string, payload: InspectPayload): PopoverModel {
  return {
    title: `${processor}.${port}`,
    rows: Object.entries(payload.info),
    images: payload.previews.map((preview) => ({
      label: preview.label,
      src: `data:image/png;base64,${preview.png}`,
    })),
    error: null,
  };
}

export function popoverFromError(processor: string, port: string, status: number, message: string): PopoverModel {
  return {
    title: `${processor}.${port}`,
    rows: [],
    images: [],
    error: status === 409 ? `not evaluable: ${message}` : `${status}: ${message}`,
  };
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderPopover(model: PopoverModel): string {
  if (model.error !== null) {
    return `<div class="popover"><h4>${esc(model.title)}</h4><p class="error">${esc(model.error)}</p></div>`;
  }
  const images = model.images
    .map(
      (image) =>
        `<figure><img src="${image.src}" alt="${esc(image.label)}"/><figcaption>${esc(image.label)}</figcaption></figure>`,
    )
    .join("");
  const rows = model.rows
    .map(([key, value]) => `<tr><th>${esc(key)}</th><td>${esc(value)}</td></tr>`)
    .join("");
  return (
    `<div class="popover"><h4>${esc(model.title)}</h4>` +
    `<div class="previews">${images}</div>` +
    `<table>${rows}</table></div>`
  );
}

/** Hover lifecycle: open on enter, wheel to scrub, close on leave. */
export class PortHover {
  private sessionId: string | null = null;
  model: PopoverModel | null = null;

  constructor(
    private readonly client: ApiClient,
    readonly processor: string,
    readonly port: string,
  ) {}

  async open(): Promise<PopoverModel> {
    try {
      const session = await this.client.openInspectSession(this.processor, this.port);
      this.sessionId = session.id;
      this.model = popoverFromPayload(this.processor, this.port, session);
    } catch {
      // fall back to the one-shot endpoint for the error detail
      const result = await this.client.inspectPort(this.processor, this.port);
      this.model = result.ok && result.payload
        ? popoverFromPayload(this.processor, this.port, result.payload)
        : popoverFromError(this.processor, this.port, result.status,
            String(result.body["message"] ?? result.body["error"] ?? "inspection failed"));
    }
    return this.model;
  }

  async wheel(delta: number): Promise<PopoverModel | null> {
    if (this.sessionId === null) {
      return this.model;
    }
    const payload = await this.client.sendWheel(this.sessionId, delta);
    this.model = popoverFromPayload(this.processor, this.port, payload);
    return this.model;
  }

  async close(): Promise<void> {
    if (this.sessionId !== null) {
      await this.client.closeInspectSession(this.sessionId);
      this.sessionId = null;
    }
    this.model = null;
  }
}
