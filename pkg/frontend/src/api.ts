// Thin fetch client for the engine service. The workspace digest is always
// the sha256 of the canonical bytes as served; the client never re-encodes.

import type {
  AppView,
  CatalogEntry,
  CommandResult,
  EventFrame,
  InspectPayload,
  WorkspaceDoc,
} from "./types.js";

export interface NetworkSnapshot {
  doc: WorkspaceDoc;
  digest: string;
}

export async function sha256Hex(bytes: Uint8Array): Promise<string> {
  const hash = await crypto.subtle.digest("SHA-256", bytes as BufferSource);
  return Array.from(new Uint8Array(hash))
    .map((b) => b.toString(16).padStart(2, "0"))
    .join("");
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async fetchNetwork(): Promise<NetworkSnapshot> {
    const response = await fetch(this.url("/api/network"));
    if (!response.ok) {
      throw new Error(`GET /api/network -> ${response.status}`);
    }
    const raw = new Uint8Array(await response.arrayBuffer());
    const doc = JSON.parse(new TextDecoder().decode(raw)) as WorkspaceDoc;
    return { doc, digest: await sha256Hex(raw) };
  }

  async fetchCatalog(): Promise<CatalogEntry[]> {
    const response = await fetch(this.url("/api/catalog"));
    if (!response.ok) {
      throw new Error(`GET /api/catalog -> ${response.status}`);
    }
    return (await response.json()) as CatalogEntry[];
  }

  async fetchApp(): Promise<AppView> {
    const response = await fetch(this.url("/api/app"));
    return (await response.json()) as AppView;
  }

  async fetchLint(): Promise<Record<string, unknown>[]> {
    const response = await fetch(this.url("/api/lint"));
    const body = (await response.json()) as { warnings: Record<string, unknown>[] };
    return body.warnings;
  }

  async postCommand(cmd: Record<string, unknown>): Promise<CommandResult> {
    const response = await fetch(this.url("/api/commands"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(cmd),
    });
    const body = (await response.json()) as Record<string, unknown>;
    return { ok: response.ok, status: response.status, body };
  }

  async inspectPort(processor: string, port: string): Promise<CommandResult & { payload?: InspectPayload }> {
    const response = await fetch(this.url(`/api/ports/${processor}/${port}/inspect`));
    const body = (await response.json()) as Record<string, unknown>;
    const result: CommandResult & { payload?: InspectPayload } = {
      ok: response.ok,
      status: response.status,
      body,
    };
    if (response.ok) {
      result.payload = body as unknown as InspectPayload;
    }
    return result;
  }

  async openInspectSession(processor: string, port: string): Promise<{ id: string } & InspectPayload> {
    const response = await fetch(this.url("/api/inspect-sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ processor, port }),
    });
    if (!response.ok) {
      throw new Error(`open inspect session -> ${response.status}`);
    }
    return (await response.json()) as { id: string } & InspectPayload;
  }

  async sendWheel(sessionId: string, delta: number): Promise<InspectPayload> {
    const response = await fetch(this.url(`/api/inspect-sessions/${sessionId}/event`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ kind: "wheel", delta }),
    });
    if (!response.ok) {
      throw new Error(`wheel event -> ${response.status}`);
    }
    return (await response.json()) as InspectPayload;
  }

  async closeInspectSession(sessionId: string): Promise<void> {
    await fetch(this.url(`/api/inspect-sessions/${sessionId}`), { method: "DELETE" });
  }

  /** Stream event frames (newline-delimited JSON) until the signal aborts. */
  async streamEvents(
    since: number,
    onFrame: (frame: EventFrame) => void,
    signal?: AbortSignal,
  ): Promise<void> {
    const response = await fetch(this.url(`/api/events?since=${since}`), { signal });
    if (!response.ok || response.body === null) {
      throw new Error(`GET /api/events -> ${response.status}`);
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffered = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) {
        break;
      }
      buffered += decoder.decode(value, { stream: true });
      let newline = buffered.indexOf("\n");
      while (newline >= 0) {
        const line = buffered.slice(0, newline).trim();
        buffered = buffered.slice(newline + 1);
        if (line.length > 0) {
          onFrame(JSON.parse(line) as EventFrame);
        }
        newline = buffered.indexOf("\n");
      }
    }
  }
}
