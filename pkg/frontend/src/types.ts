// Wire types for the engine's HTTP/JSON API.

export interface PropertyEntry {
  id: string;
  valueType: string;
  value: unknown;
  semantics: string;
}

export interface ProcessorEntry {
  classId: string;
  identifier: string;
  displayName: string;
  editorPosition: [number, number];
  properties: PropertyEntry[];
  composite?: unknown;
}

export interface ConnectionEntry {
  srcProcessor: string;
  srcPort: string;
  dstProcessor: string;
  dstPort: string;
}

export interface LinkEntry {
  src: string;
  dst: string;
}

export interface WorkspaceDoc {
  formatVersion: number;
  processors: ProcessorEntry[];
  connections: ConnectionEntry[];
  links: LinkEntry[];
  appExposed: string[];
}

export interface CatalogPort {
  id: string;
  tag: string;
  color: string;
  optional?: boolean;
}

export interface PropertySchema {
  id: string;
  valueType: string;
  default: unknown;
  min: number | null;
  max: number | null;
  semantics: string;
  options: string[] | null;
}

export interface CatalogEntry {
  classId: string;
  module: string;
  displayName: string;
  help: string;
  glyph: string;
  inports: CatalogPort[];
  outports: CatalogPort[];
  properties: PropertySchema[];
}

export interface EventFrame {
  seq: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface AppProperty {
  path: string;
  valueType: string;
  value: unknown;
  semantics: string;
  min: number | null;
  max: number | null;
  options: string[] | null;
  exposed: boolean;
}

export interface AppView {
  mode: "developer" | "application";
  properties: AppProperty[];
}

export interface InspectPreview {
  label: string;
  png: string; // base64
}

export interface InspectPayload {
  info: Record<string, string>;
  previews: InspectPreview[];
}

export interface CommandResult {
  ok: boolean;
  status: number;
  body: Record<string, unknown>;
}
