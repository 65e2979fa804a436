import { describe, expect, it } from "vitest";

import {
  colorToHex,
  hexToColor,
  mergeView,
  renderPanel,
  renderPropertyControl,
  semanticsChoices,
  setSemanticsCommand,
  setValueCommand,
  widgetFor,
} from "../src/panel.js";
import type { PropertySchema } from "../src/types.js";

const colorSchema: PropertySchema = {
  id: "color",
  valueType: "floatVec4",
  default: [0.2, 0.4, 0.8, 1.0],
  min: 0,
  max: 1,
  semantics: "color",
  options: null,
};

describe("widgetFor", () => {
  it("floatVec4 with color semantics gets a color picker, sliders otherwise", () => {
    expect(widgetFor({ valueType: "floatVec4", semantics: "color" })).toBe("color");
    expect(widgetFor({ valueType: "floatVec4", semantics: "sliders" })).toBe("sliders");
  });

  it("bounded numbers get sliders, option strings a select", () => {
    expect(widgetFor({ valueType: "int", semantics: "default" })).toBe("slider");
    expect(widgetFor({ valueType: "float", semantics: "spinbox" })).toBe("spinbox");
    expect(widgetFor({ valueType: "string", semantics: "option" })).toBe("select");
    expect(widgetFor({ valueType: "string", semantics: "path" })).toBe("path");
    expect(widgetFor({ valueType: "bool", semantics: "checkbox" })).toBe("checkbox");
    expect(widgetFor({ valueType: "transferFunction", semantics: "transferFunction" }))
      .toBe("transferFunction");
  });
});

describe("semantics switching", () => {
  it("swaps the widget without changing the value", () => {
    const value = [0.25, 0.5, 0.75, 1.0];
    const asColor = mergeView("bg.color", colorSchema,
      { id: "color", valueType: "floatVec4", value, semantics: "color" });
    const asSliders = mergeView("bg.color", colorSchema,
      { id: "color", valueType: "floatVec4", value, semantics: "sliders" });

    expect(widgetFor(asColor)).toBe("color");
    expect(widgetFor(asSliders)).toBe("sliders");
    expect(asColor.value).toEqual(asSliders.value);

    const colorHtml = renderPropertyControl(asColor);
    const slidersHtml = renderPropertyControl(asSliders);
    expect(colorHtml).toContain('data-widget="color"');
    expect(colorHtml).toContain('value="#4080bf"');
    expect(slidersHtml).toContain('data-widget="sliders"');
    expect([...slidersHtml.matchAll(/type="range"/g)]).toHaveLength(4);
    expect(slidersHtml).toContain('value="0.25"');
    expect(slidersHtml).toContain('value="0.75"');
  });

  it("offers the documented semantics per type and builds the right command", () => {
    expect(semanticsChoices("floatVec4")).toContain("color");
    expect(semanticsChoices("floatVec4")).toContain("sliders");
    expect(setSemanticsCommand("bg.color", "sliders")).toEqual({
      type: "SetProperty",
      path: "bg.color",
      semantics: "sliders",
    });
    expect(setValueCommand("bg.color", [1, 0, 0, 1])).toEqual({
      type: "SetProperty",
      path: "bg.color",
      value: [1, 0, 0, 1],
    });
  });
});

describe("color conversions", () => {
  it("rounds half-up and round-trips", () => {
    expect(colorToHex([1, 0, 0, 1])).toBe("#ff0000");
    expect(colorToHex([0.5, 0.5, 0.5, 1])).toBe("#808080"); // 127.5 -> 128
    expect(hexToColor("#ff0000", 0.5)).toEqual([1, 0, 0, 0.5]);
    const [r, g, b] = hexToColor(colorToHex([0.25, 0.5, 0.75, 1]));
    expect(r).toBeCloseTo(0.25, 2);
    expect(g).toBeCloseTo(0.5, 2);
    expect(b).toBeCloseTo(0.75, 2);
  });
});

describe("panel rendering", () => {
  it("renders a bounded int as a slider with schema bounds", () => {
    const schema: PropertySchema = {
      id: "sliceIndex", valueType: "int", default: 0,
      min: 0, max: 63, semantics: "default", options: null,
    };
    const html = renderPropertyControl(mergeView("slice.sliceIndex", schema, undefined));
    expect(html).toContain('data-widget="slider"');
    expect(html).toContain('min="0"');
    expect(html).toContain('max="63"');
    expect(html).toContain('step="1"');
  });

  it("renders option strings as selects with the current choice", () => {
    const schema: PropertySchema = {
      id: "axis", valueType: "string", default: "z",
      min: null, max: null, semantics: "option", options: ["x", "y", "z"],
    };
    const html = renderPropertyControl(
      mergeView("slice.axis", schema, { id: "axis", valueType: "string", value: "y", semantics: "option" }));
    expect(html).toContain("<select>");
    expect(html).toContain('<option value="y" selected>');
  });

  it("renders a panel with semantics menus for eligible types", () => {
    const html = renderPanel([mergeView("bg.color", colorSchema, undefined)]);
    expect(html).toContain('class="semantics"');
    expect(html).toContain('<option value="color" selected>');
  });

  it("escapes values in text controls", () => {
    const schema: PropertySchema = {
      id: "path", valueType: "string", default: "",
      min: null, max: null, semantics: "path", options: null,
    };
    const html = renderPropertyControl(
      mergeView("src.path", schema, { id: "path", valueType: "string", value: '"/tmp/x"<b>', semantics: "path" }));
    expect(html).not.toContain("<b>");
  });
});
