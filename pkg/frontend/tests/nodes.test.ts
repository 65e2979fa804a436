import { describe, expect, it } from "vitest";

import {
  NODE_HEIGHT,
  linkedPairs,
  portPosition,
  renderNetworkSvg,
  renderProcessorNode,
  tagColor,
} from "../src/nodes.js";
import { emptyDoc } from "../src/state.js";
import type { CatalogEntry, ProcessorEntry, WorkspaceDoc } from "../src/types.js";

const volumeSliceEntry: CatalogEntry = {
  classId: "VolumeSlice",
  module: "base",
  displayName: "VolumeSlice",
  help: "",
  glyph: "",
  inports: [{ id: "volume", tag: "volume", color: "#D94A4A" }],
  outports: [{ id: "image", tag: "image", color: "#4A90D9" }],
  properties: [],
};

function proc(identifier: string, classId = "VolumeSlice", at: [number, number] = [40, 60]): ProcessorEntry {
  return { classId, identifier, displayName: identifier, editorPosition: at, properties: [] };
}

describe("tag colors", () => {
  it("maps the four built-in tags and falls back to gray", () => {
    expect(tagColor("image")).toBe("#4A90D9");
    expect(tagColor("volume")).toBe("#D94A4A");
    expect(tagColor("mesh")).toBe("#D9C94A");
    expect(tagColor("buffer")).toBe("#9A9A9A");
    expect(tagColor("somethingelse")).toBe("#9A9A9A");
  });
});

describe("renderProcessorNode", () => {
  it("draws inports on top and outports on the bottom with tag colors", () => {
    const svg = renderProcessorNode(proc("slice1"), volumeSliceEntry);
    expect(svg).toContain('data-processor="slice1"');
    const inSquare = svg.match(/<rect class="port port-in"[^>]*>/)?.[0] ?? "";
    expect(inSquare).toContain('fill="#D94A4A"');
    expect(inSquare).toContain('y="2"');
    const outSquare = svg.match(/<rect class="port port-out"[^>]*>/)?.[0] ?? "";
    expect(outSquare).toContain('fill="#4A90D9"');
    expect(outSquare).toContain(`y="${NODE_HEIGHT - 12 - 2}"`);
  });

  it("draws optional inports hollow", () => {
    const entry: CatalogEntry = {
      ...volumeSliceEntry,
      inports: [{ id: "maybe", tag: "image", color: "#4A90D9", optional: true }],
    };
    const svg = renderProcessorNode(proc("p"), entry);
    const square = svg.match(/<rect class="port port-in"[^>]*>/)?.[0] ?? "";
    expect(square).toContain('fill="none"');
    expect(square).toContain('stroke="#4A90D9"');
  });

  it("renders a bare box for zero-port processors", () => {
    const entry: CatalogEntry = { ...volumeSliceEntry, inports: [], outports: [] };
    const svg = renderProcessorNode(proc("solo"), entry);
    expect(svg).not.toContain('class="port');
    expect(svg).toContain("node-box");
  });

  it("escapes markup in display names", () => {
    const hostile = proc("x");
    hostile.displayName = "<script>alert(1)</script>";
    const svg = renderProcessorNode(hostile, volumeSliceEntry);
    expect(svg).not.toContain("<script>");
  });
});

describe("network svg", () => {
  function docWith(processors: ProcessorEntry[], connections = [], links = []): WorkspaceDoc {
    return { ...emptyDoc(), processors, connections, links } as WorkspaceDoc;
  }

  it("draws connection paths between port squares", () => {
    const doc = docWith(
      [proc("a", "VolumeSlice", [0, 0]), proc("b", "VolumeSlice", [0, 200])],
      [{ srcProcessor: "a", srcPort: "image", dstProcessor: "b", dstPort: "volume" }] as never,
    );
    const svg = renderNetworkSvg(doc, [volumeSliceEntry]);
    expect(svg).toContain('class="connection"');
    const from = portPosition(doc.processors[0], 0, "out");
    expect(svg).toContain(`M ${from.x} ${from.y}`);
  });

  it("draws dotted lines between property-linked processors", () => {
    const doc = docWith(
      [proc("a"), proc("b", "VolumeSlice", [300, 0])],
      [] as never,
      [{ src: "a.sliceIndex", dst: "b.sliceIndex" }] as never,
    );
    expect(linkedPairs(doc).size).toBe(1);
    const svg = renderNetworkSvg(doc, [volumeSliceEntry]);
    expect(svg).toContain('class="property-link"');
    expect(svg).toContain("stroke-dasharray");
    expect(svg).toContain('class="link-badge"');
  });

  it("self-links do not produce a dotted line", () => {
    const doc = docWith([proc("a")], [] as never,
      [{ src: "a.sliceIndex", dst: "a.axis" }] as never);
    expect(linkedPairs(doc).size).toBe(0);
  });

  it("marks the selected node", () => {
    const doc = docWith([proc("a"), proc("b", "VolumeSlice", [200, 0])]);
    const svg = renderNetworkSvg(doc, [volumeSliceEntry], "b");
    const boxes = [...svg.matchAll(/<rect class="node-box"[^>]*stroke="([^"]+)"/g)].map((m) => m[1]);
    expect(boxes).toEqual(["#444", "#E08A00"]);
  });
});
