"""Built-in module descriptors and the default (demo) registry.

Four simulated computing platforms ship by default:

- ``cpu``: home of imported data and the reference for oracles.
- ``glsim`` / ``clsim``: device-like platforms with their own byte stores;
  copies to/from cpu cost 10 per the demo cost model.
- ``sharedsim``: a shared view of glsim's memory (host-constrained); both
  directions are zero-copy aliases of cost 0, so conversion into it always
  routes through glsim.
"""

from __future__ import annotations

from .datacore import RepKey, RepresentationKind, alias_converter, copy_converter
from .inspection import DEFAULT_DEBUG_PROVIDERS, PortInspector
from .modules import ModuleDescriptor, ModuleRegistry, PlatformDecl
from .stdlib import STDLIB_PROCESSORS

COPY_COST = 10

AUTHORING_GUIDELINES_MD = """\
# Processor authoring guidelines

A processor should stay easy to drop into a pipeline. In practice that means
favoring simplicity over flexibility: fewer ports keep networks readable,
need fewer connections, and leave less room for wiring mistakes. The network
lint (`G1`, `G2`) checks the two principles that are mechanically checkable;
the other two are judgment calls reviewed here.

## G1 - Use inports for mandatory input data

A processor does not evaluate until its mandatory inports are connected, so
inputs the algorithm cannot run without belong on ports. Properties always
carry a default and never block evaluation, which makes them a poor fit for
required data. One practical exception: file paths are mandatory for readers
but are typed by the user, so they stay properties.

## G2 - Minimize the number of inports (fewer than five)

A processor needing five or more inputs is usually an algorithm that wants
splitting into smaller units. Many same-tag inports are also hard to tell
apart when connecting, and every extra connection adds visual clutter to the
network.

## G3 - Use properties for values the user tunes

Anything meant to be adjusted interactively (slider ranges, colors, choices)
belongs in a property: the editor renders a widget for every property
semantics, while port data has to come from memory or files.

## G4 - Use properties for parameters with low transfer overhead

Linking two properties copies the value every time one of them changes. For
small parameters shared by several processors (a camera, a transfer function)
that copy is negligible next to pipeline processing time, so prefer a linked
property over extra ports. If the copy ever dominates, route the parameter
through an optional port instead, at the cost of a busier network.
"""

_ALL_KINDS = tuple(RepresentationKind)


def _copy_edges(a: str, b: str, cost: int):
    factories = []
    for kind in _ALL_KINDS:
        factories.append(lambda kind=kind: copy_converter(RepKey(a, kind), RepKey(b, kind), cost))
        factories.append(lambda kind=kind: copy_converter(RepKey(b, kind), RepKey(a, kind), cost))
    return factories


def cpu_module() -> ModuleDescriptor:
    return ModuleDescriptor(name="cpu", platforms=[PlatformDecl("cpu")])


def glsim_module() -> ModuleDescriptor:
    return ModuleDescriptor(
        name="glsim",
        dependencies=[("cpu", (1, 0))],
        platforms=[PlatformDecl("glsim")],
        converters=_copy_edges("cpu", "glsim", COPY_COST),
    )


def clsim_module() -> ModuleDescriptor:
    return ModuleDescriptor(
        name="clsim",
        dependencies=[("cpu", (1, 0))],
        platforms=[PlatformDecl("clsim")],
        converters=_copy_edges("cpu", "clsim", COPY_COST),
    )


def sharedsim_module() -> ModuleDescriptor:
    factories = []
    for kind in _ALL_KINDS:
        factories.append(lambda kind=kind: alias_converter(
            RepKey("glsim", kind), RepKey("sharedsim", kind), cost=0))
        factories.append(lambda kind=kind: alias_converter(
            RepKey("sharedsim", kind), RepKey("glsim", kind), cost=0))
    return ModuleDescriptor(
        name="sharedsim",
        dependencies=[("glsim", (1, 0))],
        platforms=[PlatformDecl("sharedsim", shared_host="glsim")],
        converters=factories,
    )


def image_inspector() -> PortInspector:
    template = {
        "formatVersion": 1,
        "processors": [{
            "classId": "Canvas", "identifier": "inspectCanvas",
            "displayName": "Inspect Canvas", "editorPosition": [0, 0], "properties": [],
        }],
        "connections": [],
        "links": [],
        "appExposed": [],
    }
    return PortInspector(target_tag="image", template_doc=template)


def volume_inspector() -> PortInspector:
    template = {
        "formatVersion": 1,
        "processors": [
            {"classId": "VolumeSlice", "identifier": "inspectSlice",
             "displayName": "Inspect Slice", "editorPosition": [0, 0], "properties": []},
            {"classId": "Canvas", "identifier": "inspectCanvas",
             "displayName": "Inspect Canvas", "editorPosition": [0, 120], "properties": []},
        ],
        "connections": [{
            "srcProcessor": "inspectSlice", "srcPort": "image",
            "dstProcessor": "inspectCanvas", "dstPort": "image",
        }],
        "links": [],
        "appExposed": [],
    }
    return PortInspector(target_tag="volume", template_doc=template,
                         event_target="inspectSlice.sliceIndex", center_event_target=True)


def base_module() -> ModuleDescriptor:
    return ModuleDescriptor(
        name="base",
        dependencies=[("cpu", (1, 0))],
        processors=list(STDLIB_PROCESSORS),
        inspectors=[image_inspector(), volume_inspector()],
        debug_providers=dict(DEFAULT_DEBUG_PROVIDERS),
        doc_pages=[("processor-authoring", "Processor authoring guidelines", AUTHORING_GUIDELINES_MD)],
    )


def default_module_registry() -> ModuleRegistry:
    """Registry with every built-in module loaded (the 4-platform demo graph)."""
    registry = ModuleRegistry()
    for descriptor in (cpu_module(), glsim_module(), clsim_module(), sharedsim_module(), base_module()):
        registry.load_module(descriptor)
    return registry
