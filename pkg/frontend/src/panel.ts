// Property panel: the widget for a property is chosen by its semantics tag,
// never by guessing from the value. Switching semantics swaps the widget and
// must leave the value untouched.

import type { AppProperty, PropertyEntry, PropertySchema } from "./types.js";

export type WidgetKind =
  | "color"
  | "sliders"
  | "slider"
  | "spinbox"
  | "checkbox"
  | "text"
  | "path"
  | "select"
  | "transferFunction";

export interface PropertyView {
  path: string;
  valueType: string;
  value: unknown;
  semantics: string;
  min: number | null;
  max: number | null;
  options: string[] | null;
}

/** Widget selection table, keyed by (valueType, semantics). */
export function widgetFor(view: Pick<PropertyView, "valueType" | "semantics">): WidgetKind {
  switch (view.valueType) {
    case "floatVec4":
      return view.semantics === "color" ? "color" : "sliders";
    case "float":
    case "int":
      return view.semantics === "spinbox" ? "spinbox" : "slider";
    case "bool":
      return "checkbox";
    case "string":
      if (view.semantics === "option") {
        return "select";
      }
      return view.semantics === "path" ? "path" : "text";
    case "transferFunction":
      return "transferFunction";
    default:
      return "text";
  }
}

/** Alternative semantics offered in the widget's context menu. */
export function semanticsChoices(valueType: string): string[] {
  switch (valueType) {
    case "floatVec4":
      return ["sliders", "color", "spinbox"];
    case "float":
    case "int":
      return ["default", "sliders", "spinbox"];
    case "string":
      return ["text", "multiline", "path", "option"];
    default:
      return [];
  }
}

export function mergeView(path: string, schema: PropertySchema, stored?: PropertyEntry): PropertyView {
  return {
    path,
    valueType: schema.valueType,
    value: stored !== undefined ? stored.value : schema.default,
    semantics: stored !== undefined ? stored.semantics : schema.semantics,
    min: schema.min,
    max: schema.max,
    options: schema.options,
  };
}

export function appPropertyView(prop: AppProperty): PropertyView {
  return {
    path: prop.path,
    valueType: prop.valueType,
    value: prop.value,
    semantics: prop.semantics,
    min: prop.min,
    max: prop.max,
    options: prop.options,
  };
}

export function setValueCommand(path: string, value: unknown): Record<string, unknown> {
  return { type: "SetProperty", path, value };
}

export function setSemanticsCommand(path: string, semantics: string): Record<string, unknown> {
  return { type: "SetProperty", path, semantics };
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function vec4(value: unknown): [number, number, number, number] {
  const arr = Array.isArray(value) ? value : [0, 0, 0, 1];
  return [Number(arr[0] ?? 0), Number(arr[1] ?? 0), Number(arr[2] ?? 0), Number(arr[3] ?? 1)];
}

export function colorToHex(value: unknown): string {
  const [r, g, b] = vec4(value);
  const channel = (v: number) =>
    Math.max(0, Math.min(255, Math.floor(v * 255 + 0.5)))
      .toString(16)
      .padStart(2, "0");
  return `#${channel(r)}${channel(g)}${channel(b)}`;
}

export function hexToColor(hex: string, alpha = 1.0): [number, number, number, number] {
  const m = /^#?([0-9a-f]{2})([0-9a-f]{2})([0-9a-f]{2})$/i.exec(hex.trim());
  if (!m) {
    return [0, 0, 0, alpha];
  }
  return [parseInt(m[1], 16) / 255, parseInt(m[2], 16) / 255, parseInt(m[3], 16) / 255, alpha];
}

/** One control, as HTML. Data attributes carry the wiring contract:
 *  data-path + data-widget on the container, data-channel on vec inputs. */
export function renderPropertyControl(view: PropertyView): string {
  const kind = widgetFor(view);
  const head =
    `<div class="property" data-path="${esc(view.path)}" data-widget="${kind}">` +
    `<label>${esc(view.path.split(".").pop() ?? view.path)}</label>`;
  const foot = "</div>";
  switch (kind) {
    case "color": {
      const [, , , a] = vec4(view.value);
      return (
        head +
        `<input type="color" value="${colorToHex(view.value)}" data-alpha="${a}"/>` +
        foot
      );
    }
    case "sliders": {
      const channels = vec4(view.value)
        .map(
          (v, i) =>
            `<input type="range" data-channel="${i}" min="${view.min ?? 0}" ` +
            `max="${view.max ?? 1}" step="0.01" value="${v}"/>`,
        )
        .join("");
      return head + channels + foot;
    }
    case "slider": {
      const step = view.valueType === "int" ? 1 : 0.01;
      return (
        head +
        `<input type="range" min="${view.min ?? 0}" max="${view.max ?? 100}" ` +
        `step="${step}" value="${String(view.value)}"/>` +
        `<span class="value">${String(view.value)}</span>` +
        foot
      );
    }
    case "spinbox":
      return head + `<input type="number" value="${String(view.value)}"/>` + foot;
    case "checkbox":
      return head + `<input type="checkbox"${view.value ? " checked" : ""}/>` + foot;
    case "select": {
      const options = (view.options ?? [])
        .map(
          (option) =>
            `<option value="${esc(option)}"${option === view.value ? " selected" : ""}>${esc(option)}</option>`,
        )
        .join("");
      return head + `<select>${options}</select>` + foot;
    }
    case "path":
      return head + `<input type="text" class="path" value="${esc(String(view.value))}"/>` + foot;
    case "transferFunction": {
      const points = Array.isArray(view.value) ? (view.value as [number, number[]][]) : [];
      const stops = points
        .map(([pos, rgba]) => {
          const hex = colorToHex(rgba);
          return `<span class="tf-stop" style="left:${pos * 100}%;background:${hex}" data-pos="${pos}"></span>`;
        })
        .join("");
      return (
        head +
        `<div class="tf-strip">${stops}</div>` +
        `<textarea class="tf-json">${esc(JSON.stringify(view.value))}</textarea>` +
        foot
      );
    }
    case "text":
    default:
      return head + `<input type="text" value="${esc(String(view.value))}"/>` + foot;
  }
}

/** Panel for one selected processor: a control per property plus the
 *  semantics context menu entries. */
export function renderPanel(views: PropertyView[]): string {
  const controls = views
    .map((view) => {
      const menu = semanticsChoices(view.valueType)
        .map((tag) => `<option value="${tag}"${tag === view.semantics ? " selected" : ""}>${tag}</option>`)
        .join("");
      const semantics = menu
        ? `<select class="semantics" data-path="${esc(view.path)}">${menu}</select>`
        : "";
      return renderPropertyControl(view) + semantics;
    })
    .join("\n");
  return `<div class="panel">${controls}</div>`;
}
