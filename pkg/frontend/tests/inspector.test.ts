import { describe, expect, it } from "vitest";

import { popoverFromError, popoverFromPayload, renderPopover } from "../src/inspector.js";

const payload = {
  info: { port: "image", tag: "image", dims: "16×16" },
  previews: [
    { label: "inspectCanvas:color", png: "AAAA" },
    { label: "inspectCanvas:picking", png: "BBBB" },
    { label: "inspectCanvas:depth", png: "CCCC" },
  ],
};

describe("popover model", () => {
  it("turns previews into data urls and info into rows", () => {
    const model = popoverFromPayload("noise", "image", payload);
    expect(model.title).toBe("noise.image");
    expect(model.images).toHaveLength(3);
    expect(model.images[0].src).toBe("data:image/png;base64,AAAA");
    expect(model.rows).toContainEqual(["dims", "16×16"]);
    expect(model.error).toBeNull();
  });

  it("renders three figures and the info table", () => {
    const html = renderPopover(popoverFromPayload("noise", "image", payload));
    expect([...html.matchAll(/<figure>/g)]).toHaveLength(3);
    expect(html).toContain("inspectCanvas:picking");
    expect(html).toContain("<th>port</th><td>image</td>");
  });

  it("shows a not-evaluable notice on 409", () => {
    const model = popoverFromError("slice", "image", 409, "upstream not ready");
    expect(model.error).toContain("not evaluable");
    const html = renderPopover(model);
    expect(html).toContain('class="error"');
    expect(html).not.toContain("<figure>");
  });
});
