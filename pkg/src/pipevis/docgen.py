"""Doc bundle generation from the registry's co-located processor docs.

Each registered processor yields one HTML page carrying its class id, an
auto-generated glyph (the same box-with-port-squares drawing the editor uses),
and its port/property tables. Output is byte-deterministic: stable ordering,
no timestamps.
"""

from __future__ import annotations

import html
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import WriteFailure
from .network import PORT_TAG_COLORS, Processor

UNKNOWN_TAG_COLOR = "#9A9A9A"

_STYLE = (
    "body{font-family:sans-serif;margin:2em auto;max-width:56em;padding:0 1em;color:#222}"
    "table{border-collapse:collapse;margin:1em 0}"
    "td,th{border:1px solid #bbb;padding:.3em .6em;text-align:left}"
    "th{background:#eee}"
    "code{background:#f4f4f4;padding:0 .2em}"
    "nav{margin-bottom:1.5em}"
    ".undocumented{color:#a33;font-style:italic}"
)


@dataclass
class CatalogEntry:
    """Introspected schema of one processor class."""

    class_id: str
    module: str
    display_name: str
    help_md: str
    inports: list[tuple[str, str, bool]]   # (id, tag, optional)
    outports: list[tuple[str, str]]        # (id, tag)
    properties: list[dict]
    port_docs: dict[str, str]
    property_docs: dict[str, str]


@dataclass
class DocBundleSummary:
    pages: int
    warnings: list[str] = field(default_factory=list)


def catalog_entry(registry, class_id: str) -> CatalogEntry:
    cls, module = registry.processor_classes[class_id]
    probe: Processor = cls()
    return CatalogEntry(
        class_id=class_id,
        module=module,
        display_name=probe.display_name,
        help_md=cls.HELP,
        inports=[(p.id, p.tag, p.optional) for p in probe.inports.values()],
        outports=[(p.id, p.tag) for p in probe.outports.values()],
        properties=[probe.properties[pid].schema() for pid in probe.properties],
        port_docs=dict(cls.PORT_DOCS),
        property_docs=dict(cls.PROPERTY_DOCS),
    )


def catalog_entries(registry) -> list[CatalogEntry]:
    return [catalog_entry(registry, class_id) for class_id in registry.catalog()]


# --- glyphs ---------------------------------------------------------------------


def tag_color(tag: str) -> str:
    return PORT_TAG_COLORS.get(tag, UNKNOWN_TAG_COLOR)


def render_glyph(entry: CatalogEntry) -> str:
    """SVG of the processor box: inport squares in a top row, outports bottom.

    Squares are filled with the tag color; optional inports are hollow.
    """
    square, gap, margin = 14, 4, 8
    columns = max(len(entry.inports), len(entry.outports), 1)
    width = max(140, margin * 2 + columns * (square + gap) - gap,
                16 + 7 * len(entry.display_name))
    height = 64
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" role="img">',
        f'<rect x="1" y="1" width="{width - 2}" height="{height - 2}" rx="6" '
        'fill="#F5F5F5" stroke="#444" stroke-width="1.5"/>',
        f'<text x="{width // 2}" y="{height // 2 + 4}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" fill="#222">{html.escape(entry.display_name)}</text>',
    ]
    for i, (port_id, tag, optional) in enumerate(entry.inports):
        x = margin + i * (square + gap)
        color = tag_color(tag)
        fill = "none" if optional else color
        parts.append(
            f'<rect x="{x}" y="2" width="{square}" height="{square}" fill="{fill}" '
            f'stroke="{color}" stroke-width="2"><title>{html.escape(port_id)} ({tag})</title></rect>')
    for i, (port_id, tag) in enumerate(entry.outports):
        x = margin + i * (square + gap)
        color = tag_color(tag)
        parts.append(
            f'<rect x="{x}" y="{height - square - 2}" width="{square}" height="{square}" '
            f'fill="{color}" stroke="{color}" stroke-width="2">'
            f'<title>{html.escape(port_id)} ({tag})</title></rect>')
    parts.append("</svg>")
    return "".join(parts)


# --- markdown -> html (tiny, deterministic subset) ---------------------------------


def _inline_md(text: str) -> str:
    out = html.escape(text, quote=False)
    out = re.sub(r"`([^`]+)`", r"<code>\1</code>", out)
    out = re.sub(r"\*\*([^*]+)\*\*", r"<strong>\1</strong>", out)
    out = re.sub(r"\*([^*]+)\*", r"<em>\1</em>", out)
    return out


def markdown_to_html(markdown: str) -> str:
    blocks: list[str] = []
    paragraph: list[str] = []
    bullets: list[str] = []

    def flush_paragraph() -> None:
        if paragraph:
            blocks.append("<p>" + _inline_md(" ".join(paragraph)) + "</p>")
            paragraph.clear()

    def flush_bullets() -> None:
        if bullets:
            blocks.append("<ul>" + "".join(f"<li>{_inline_md(b)}</li>" for b in bullets) + "</ul>")
            bullets.clear()

    for raw_line in markdown.splitlines():
        line = raw_line.rstrip()
        stripped = line.strip()
        if not stripped:
            flush_paragraph()
            flush_bullets()
            continue
        heading = re.match(r"(#{1,3})\s+(.*)", stripped)
        if heading:
            flush_paragraph()
            flush_bullets()
            level = len(heading.group(1))
            blocks.append(f"<h{level}>{_inline_md(heading.group(2))}</h{level}>")
            continue
        if stripped.startswith("- "):
            flush_paragraph()
            bullets.append(stripped[2:])
            continue
        if bullets:
            bullets[-1] += " " + stripped
        else:
            paragraph.append(stripped)
    flush_paragraph()
    flush_bullets()
    return "\n".join(blocks)


# --- pages ------------------------------------------------------------------------


def _page(title: str, body: str, root: str = "") -> bytes:
    return (
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
        f"<title>{html.escape(title)}</title><style>{_STYLE}</style></head>\n"
        f"<body><nav><a href=\"{root}index.html\">index</a></nav>\n{body}\n</body></html>\n"
    ).encode("utf-8")


def _processor_page(entry: CatalogEntry) -> tuple[bytes, list[str]]:
    warnings = []
    rows = []
    for port_id, tag, optional in entry.inports:
        doc = entry.port_docs.get(port_id, "")
        kind = "inport (optional)" if optional else "inport"
        rows.append(f"<tr><td><code>{html.escape(port_id)}</code></td><td>{kind}</td>"
                    f"<td>{tag}</td><td>{_inline_md(doc)}</td></tr>")
    for port_id, tag in entry.outports:
        doc = entry.port_docs.get(port_id, "")
        rows.append(f"<tr><td><code>{html.escape(port_id)}</code></td><td>outport</td>"
                    f"<td>{tag}</td><td>{_inline_md(doc)}</td></tr>")
    port_table = ("<table><tr><th>port</th><th>direction</th><th>tag</th><th>description</th></tr>"
                  + "".join(rows) + "</table>") if rows else "<p>No ports.</p>"

    prop_rows = []
    for schema in entry.properties:
        doc = entry.property_docs.get(schema["id"], "")
        bounds = ""
        if schema["min"] is not None or schema["max"] is not None:
            bounds = f"[{schema['min']}, {schema['max']}]"
        prop_rows.append(
            f"<tr><td><code>{html.escape(schema['id'])}</code></td><td>{schema['valueType']}</td>"
            f"<td><code>{html.escape(repr(schema['default']))}</code></td><td>{bounds}</td>"
            f"<td>{schema['semantics']}</td><td>{_inline_md(doc)}</td></tr>")
    prop_table = ("<table><tr><th>property</th><th>type</th><th>default</th><th>bounds</th>"
                  "<th>semantics</th><th>description</th></tr>" + "".join(prop_rows) + "</table>") \
        if prop_rows else "<p>No properties.</p>"

    if entry.help_md.strip():
        help_html = markdown_to_html(entry.help_md)
    else:
        help_html = "<p class=\"undocumented\">undocumented</p>"
        warnings.append(f"processor {entry.class_id} has no help documentation")

    body = (
        f"<h1><code>{html.escape(entry.class_id)}</code></h1>"
        f"<p>module: <a href=\"../modules/{entry.module}.html\">{entry.module}</a></p>"
        f"{render_glyph(entry)}"
        f"{help_html}"
        f"<h2>Ports</h2>{port_table}"
        f"<h2>Properties</h2>{prop_table}"
    )
    return _page(entry.class_id, body, root="../"), warnings


def build_bundle(registry) -> tuple[dict[str, bytes], DocBundleSummary]:
    """Render the whole doc bundle into a path->bytes map."""
    files: dict[str, bytes] = {}
    warnings: list[str] = []
    entries = catalog_entries(registry)

    by_module: dict[str, list[CatalogEntry]] = {}
    for entry in entries:
        page, page_warnings = _processor_page(entry)
        files[f"processors/{entry.class_id}.html"] = page
        warnings.extend(page_warnings)
        by_module.setdefault(entry.module, []).append(entry)

    page_index: dict[str, list[tuple[str, str]]] = {}
    for slug in sorted(registry.doc_pages):
        module, title, markdown = registry.doc_pages[slug]
        files[f"pages/{slug}.html"] = _page(title, f"<h1>{html.escape(title)}</h1>"
                                            + markdown_to_html(markdown), root="../")
        page_index.setdefault(module, []).append((slug, title))

    module_names = sorted(set(by_module) | set(page_index) | set(registry.module_names))
    for module in module_names:
        items = "".join(
            f"<li><a href=\"../processors/{e.class_id}.html\"><code>{html.escape(e.class_id)}</code></a>"
            f" - {_inline_md(e.help_md.strip().splitlines()[0] if e.help_md.strip() else 'undocumented')}</li>"
            for e in by_module.get(module, []))
        pages = "".join(
            f"<li><a href=\"../pages/{slug}.html\">{html.escape(title)}</a></li>"
            for slug, title in page_index.get(module, []))
        body = (f"<h1>module {html.escape(module)}</h1>"
                f"<h2>Processors</h2><ul>{items or '<li>none</li>'}</ul>"
                + (f"<h2>Pages</h2><ul>{pages}</ul>" if pages else ""))
        files[f"modules/{module}.html"] = _page(f"module {module}", body, root="../")

    index_items = "".join(
        f"<li><a href=\"processors/{e.class_id}.html\"><code>{html.escape(e.class_id)}</code></a>"
        f" <small>({e.module})</small></li>" for e in entries)
    module_items = "".join(
        f"<li><a href=\"modules/{m}.html\">{html.escape(m)}</a></li>" for m in module_names)
    extra_pages = "".join(
        f"<li><a href=\"pages/{slug}.html\">{html.escape(registry.doc_pages[slug][1])}</a></li>"
        for slug in sorted(registry.doc_pages))
    index_body = (
        "<h1>Processor documentation</h1>"
        f"<h2>Modules</h2><ul>{module_items}</ul>"
        f"<h2>Processors</h2><ul>{index_items}</ul>"
        + (f"<h2>Guides</h2><ul>{extra_pages}</ul>" if extra_pages else ""))
    files["index.html"] = _page("Processor documentation", index_body)

    return files, DocBundleSummary(pages=len(entries), warnings=warnings)


def build_docs(registry, out_dir: str | Path) -> DocBundleSummary:
    """Write the doc bundle to disk; returns {pages, warnings}."""
    files, summary = build_bundle(registry)
    root = Path(out_dir)
    try:
        for rel_path, content in sorted(files.items()):
            target = root / rel_path
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(content)
    except OSError as exc:
        raise WriteFailure(f"cannot write doc bundle to {root}: {exc}") from exc
    return summary
