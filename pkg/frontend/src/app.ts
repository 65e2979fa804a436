// Editor shell: wires the pure rendering/state modules to the DOM.
//
// Developer mode shows the catalog list, the graph canvas, and the property
// panel; application mode hides the graph and lists only exposed properties.

import { ApiClient } from "./api.js";
import { PortHover } from "./inspector.js";
import { renderNetworkSvg } from "./nodes.js";
import {
  appPropertyView,
  hexToColor,
  mergeView,
  renderPanel,
  setSemanticsCommand,
  setValueCommand,
} from "./panel.js";
import {
  EditorState,
  applyEvent,
  freshIdentifier,
  initialState,
  reconcile,
  selectProcessor,
} from "./state.js";
import type { CatalogEntry, EventFrame } from "./types.js";

interface PendingConnection {
  processor: string;
  port: string;
  tag: string;
}

export class EditorApp {
  state: EditorState = initialState();
  private pendingConnection: PendingConnection | null = null;
  private hover: PortHover | null = null;
  private readonly abort = new AbortController();

  constructor(
    private readonly client: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    const [snapshot, catalog] = await Promise.all([
      this.client.fetchNetwork(),
      this.client.fetchCatalog(),
    ]);
    this.state = { ...this.state, doc: snapshot.doc, digest: snapshot.digest, catalog };
    this.mount();
    this.render();
    void this.client.streamEvents(
      this.state.lastEventSeq,
      (frame) => void this.onEvent(frame),
      this.abort.signal,
    ).catch(() => undefined);
  }

  stop(): void {
    this.abort.abort();
  }

  private async onEvent(frame: EventFrame): Promise<void> {
    this.state = applyEvent(this.state, frame);
    this.state = await reconcile(this.client, this.state);
    this.render();
  }

  /** Drop handler: create the processor server-side at the drop position. */
  async dropFromCatalog(classId: string, x: number, y: number): Promise<string | null> {
    const identifier = freshIdentifier(this.state.doc, classId);
    const result = await this.client.postCommand({
      type: "AddProcessor",
      classId,
      identifier,
      position: [Math.round(x), Math.round(y)],
    });
    return result.ok ? identifier : null;
  }

  async portClicked(processor: string, port: string, direction: "in" | "out", tag: string): Promise<void> {
    if (direction === "out") {
      this.pendingConnection = { processor, port, tag };
      return;
    }
    if (this.pendingConnection !== null) {
      await this.client.postCommand({
        type: "Connect",
        srcProcessor: this.pendingConnection.processor,
        srcPort: this.pendingConnection.port,
        dstProcessor: processor,
        dstPort: port,
      });
      this.pendingConnection = null;
    }
  }

  // --- DOM ------------------------------------------------------------------

  private mount(): void {
    this.root.innerHTML = [
      '<header><h1>pipevis editor</h1>',
      '<label><input type="checkbox" id="mode-toggle"/> application mode</label>',
      '<button id="evaluate">evaluate</button></header>',
      '<main><aside id="catalog"></aside>',
      '<section id="canvas-wrap"><svg id="canvas" width="1600" height="1200"></svg></section>',
      '<aside id="panel"></aside></main>',
      '<div id="popover-host"></div>',
    ].join("");

    const canvas = this.query<SVGSVGElement>("#canvas");
    canvas.addEventListener("dragover", (event) => event.preventDefault());
    canvas.addEventListener("drop", (event) => {
      event.preventDefault();
      const classId = event.dataTransfer?.getData("text/pipevis-class");
      if (classId) {
        const rect = canvas.getBoundingClientRect();
        void this.dropFromCatalog(classId, event.clientX - rect.left, event.clientY - rect.top);
      }
    });
    canvas.addEventListener("click", (event) => this.onCanvasClick(event));
    canvas.addEventListener("mouseover", (event) => void this.onCanvasHover(event));
    canvas.addEventListener("mouseout", (event) => void this.onCanvasLeave(event));
    canvas.addEventListener("wheel", (event) => void this.onCanvasWheel(event), { passive: false });

    this.query<HTMLInputElement>("#mode-toggle").addEventListener("change", (event) => {
      const mode = (event.target as HTMLInputElement).checked ? "application" : "developer";
      void this.client.postCommand({ type: "SetMode", mode });
    });
    this.query<HTMLButtonElement>("#evaluate").addEventListener("click", () => {
      void this.client.postCommand({ type: "Evaluate" });
    });
    this.query<HTMLElement>("#panel").addEventListener("change", (event) => void this.onPanelChange(event));
  }

  private query<T extends Element>(selector: string): T {
    const found = this.root.querySelector(selector);
    if (!found) {
      throw new Error(`missing element ${selector}`);
    }
    return found as T;
  }

  private onCanvasClick(event: Event): void {
    const target = event.target as Element;
    const portEl = target.closest(".port");
    const nodeEl = target.closest(".node");
    if (portEl && nodeEl) {
      const processor = nodeEl.getAttribute("data-processor") ?? "";
      const port = portEl.getAttribute("data-port") ?? "";
      const direction = portEl.classList.contains("port-out") ? "out" : "in";
      void this.portClicked(processor, port, direction, portEl.getAttribute("data-tag") ?? "");
      return;
    }
    this.state = selectProcessor(this.state, nodeEl?.getAttribute("data-processor") ?? null);
    this.render();
  }

  private async onCanvasHover(event: Event): Promise<void> {
    const target = event.target as Element;
    const portEl = target.closest(".port-out");
    const nodeEl = target.closest(".node");
    if (!portEl || !nodeEl || this.hover !== null) {
      return;
    }
    this.hover = new PortHover(
      this.client,
      nodeEl.getAttribute("data-processor") ?? "",
      portEl.getAttribute("data-port") ?? "",
    );
    const model = await this.hover.open();
    this.query<HTMLElement>("#popover-host").innerHTML = model
      ? (await import("./inspector.js")).renderPopover(model)
      : "";
  }

  private async onCanvasLeave(event: Event): Promise<void> {
    const target = event.target as Element;
    if (!target.closest(".port-out") || this.hover === null) {
      return;
    }
    await this.hover.close();
    this.hover = null;
    this.query<HTMLElement>("#popover-host").innerHTML = "";
  }

  private async onCanvasWheel(event: WheelEvent): Promise<void> {
    if (this.hover === null) {
      return;
    }
    event.preventDefault();
    const model = await this.hover.wheel(event.deltaY < 0 ? -1 : 1);
    if (model) {
      this.query<HTMLElement>("#popover-host").innerHTML =
        (await import("./inspector.js")).renderPopover(model);
    }
  }

  private async onPanelChange(event: Event): Promise<void> {
    const target = event.target as HTMLInputElement | HTMLSelectElement;
    if (target.classList.contains("semantics")) {
      const path = target.getAttribute("data-path");
      if (path) {
        await this.client.postCommand(setSemanticsCommand(path, target.value));
      }
      return;
    }
    const container = target.closest(".property");
    const path = container?.getAttribute("data-path");
    const widget = container?.getAttribute("data-widget");
    if (!container || !path) {
      return;
    }
    let value: unknown;
    switch (widget) {
      case "color":
        value = hexToColor(target.value, Number(target.getAttribute("data-alpha") ?? "1"));
        break;
      case "sliders": {
        const sliders = [...container.querySelectorAll<HTMLInputElement>("input[data-channel]")];
        value = sliders.map((input) => Number(input.value));
        break;
      }
      case "checkbox":
        value = (target as HTMLInputElement).checked;
        break;
      case "slider":
      case "spinbox": {
        const numeric = Number(target.value);
        value = Number.isInteger(numeric) && widget === "slider" && target.getAttribute("step") === "1"
          ? Math.round(numeric)
          : numeric;
        break;
      }
      case "transferFunction":
        try {
          value = JSON.parse((container.querySelector(".tf-json") as HTMLTextAreaElement).value);
        } catch {
          return;
        }
        break;
      default:
        value = target.value;
    }
    await this.client.postCommand(setValueCommand(path, value));
  }

  // --- rendering ----------------------------------------------------------------

  render(): void {
    const inApp = this.state.mode === "application";
    this.query<HTMLElement>("#catalog").innerHTML = inApp ? "" : this.renderCatalog();
    const canvasWrap = this.query<HTMLElement>("#canvas-wrap");
    canvasWrap.style.display = inApp ? "none" : "";
    if (!inApp) {
      this.query<SVGSVGElement>("#canvas").innerHTML =
        renderNetworkSvg(this.state.doc, this.state.catalog, this.state.selection);
    }
    void this.renderPanelFor(inApp);
    if (!inApp) {
      this.bindCatalogDrag();
    }
  }

  private renderCatalog(): string {
    return this.state.catalog
      .map(
        (entry: CatalogEntry) =>
          `<div class="catalog-entry" draggable="true" data-class="${entry.classId}" ` +
          `title="${entry.displayName}">${entry.glyph}</div>`,
      )
      .join("");
  }

  private bindCatalogDrag(): void {
    for (const el of this.root.querySelectorAll<HTMLElement>(".catalog-entry")) {
      el.addEventListener("dragstart", (event) => {
        event.dataTransfer?.setData("text/pipevis-class", el.getAttribute("data-class") ?? "");
      });
    }
  }

  private async renderPanelFor(inApp: boolean): Promise<void> {
    const panel = this.query<HTMLElement>("#panel");
    if (inApp) {
      const app = await this.client.fetchApp();
      panel.innerHTML = renderPanel(app.properties.map(appPropertyView));
      return;
    }
    const selected = this.state.doc.processors.find((p) => p.identifier === this.state.selection);
    if (!selected) {
      panel.innerHTML = '<p class="hint">select a processor</p>';
      return;
    }
    const entry = this.state.catalog.find((e) => e.classId === selected.classId);
    if (!entry) {
      panel.innerHTML = "";
      return;
    }
    const views = entry.properties.map((schema) =>
      mergeView(
        `${selected.identifier}.${schema.id}`,
        schema,
        selected.properties.find((p) => p.id === schema.id),
      ),
    );
    panel.innerHTML = renderPanel(views);
  }
}

export function bootstrap(baseUrl: string, rootId = "app"): EditorApp {
  const root = document.getElementById(rootId);
  if (!root) {
    throw new Error(`missing #${rootId}`);
  }
  const app = new EditorApp(new ApiClient(baseUrl), root);
  void app.start();
  return app;
}
