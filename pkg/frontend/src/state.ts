// Editor state and event reconciliation.
//
// The workspace mirror is only ever replaced by bytes fetched from the
// server; events tell us when our mirror digest went stale. After
// reconciliation the mirror digest always equals the server's digest.

import type { ApiClient } from "./api.js";
import type { CatalogEntry, EventFrame, WorkspaceDoc } from "./types.js";

export interface EditorState {
  doc: WorkspaceDoc;
  digest: string;
  catalog: CatalogEntry[];
  selection: string | null;
  mode: "developer" | "application";
  lastEventSeq: number;
  pendingCommands: number;
  /** Server digest advertised by the latest networkChanged event. */
  serverDigest: string;
  lastEvaluation: string[] | null;
  lintWarnings: Record<string, unknown>[];
}

export function emptyDoc(): WorkspaceDoc {
  return { formatVersion: 1, processors: [], connections: [], links: [], appExposed: [] };
}

export function initialState(): EditorState {
  return {
    doc: emptyDoc(),
    digest: "",
    catalog: [],
    selection: null,
    mode: "developer",
    lastEventSeq: 0,
    pendingCommands: 0,
    serverDigest: "",
    lastEvaluation: null,
    lintWarnings: [],
  };
}

/** Pure event application; never mutates its input. */
export function applyEvent(state: EditorState, frame: EventFrame): EditorState {
  if (frame.seq <= state.lastEventSeq) {
    return state; // replayed or duplicate frame
  }
  const next: EditorState = { ...state, lastEventSeq: frame.seq };
  switch (frame.kind) {
    case "networkChanged":
      next.serverDigest = String(frame.payload["digest"] ?? "");
      break;
    case "modeChanged":
      next.mode = frame.payload["mode"] === "application" ? "application" : "developer";
      break;
    case "evaluationFinished":
      next.lastEvaluation = (frame.payload["processed"] as string[]) ?? [];
      break;
    case "lintChanged":
      next.lintWarnings = (frame.payload["warnings"] as Record<string, unknown>[]) ?? [];
      break;
    default:
      break; // processorInvalidated, moduleReloaded: nothing mirrored locally
  }
  return next;
}

export function needsRefetch(state: EditorState): boolean {
  return state.serverDigest !== "" && state.serverDigest !== state.digest;
}

/** Refetch the workspace mirror when events say it diverged. */
export async function reconcile(client: ApiClient, state: EditorState): Promise<EditorState> {
  if (!needsRefetch(state)) {
    return state;
  }
  const snapshot = await client.fetchNetwork();
  return { ...state, doc: snapshot.doc, digest: snapshot.digest };
}

export function selectProcessor(state: EditorState, identifier: string | null): EditorState {
  if (identifier !== null && !state.doc.processors.some((p) => p.identifier === identifier)) {
    return state;
  }
  return { ...state, selection: identifier };
}

/** Unique identifier for a freshly dropped catalog entry. */
export function freshIdentifier(doc: WorkspaceDoc, classId: string): string {
  const base = classId.charAt(0).toLowerCase() + classId.slice(1);
  const taken = new Set(doc.processors.map((p) => p.identifier));
  for (let i = 1; ; i++) {
    const candidate = `${base}${i}`;
    if (!taken.has(candidate)) {
      return candidate;
    }
  }
}
