from __future__ import annotations

import pytest

from pipevis.errors import (
    DuplicateModule,
    MissingDependency,
    ModuleNotLoaded,
    ReloadFailure,
    UnknownClass,
    UnreadablePath,
    VersionMismatch,
)
from pipevis.modules import ModuleDescriptor, ModuleRegistry, PlatformDecl
from pipevis.network import InvalidationLevel, Processor, ProcessorNetwork, Property
from pipevis.workspace import digest

from .helpers import NumberSink, NumberSource, make_module, make_test_registry


def registry_fingerprint(reg: ModuleRegistry) -> tuple:
    return (
        tuple(reg.catalog()),
        tuple(reg.platform_registry.platforms),
        tuple(sorted(reg.port_inspectors)),
        tuple(sorted(reg.doc_pages)),
        tuple(sorted(reg.module_names)),
    )


# --- load ------------------------------------------------------------------------


def test_load_makes_classes_resolvable():
    reg = make_test_registry()
    assert reg.has_class("NumberSource")
    proc = reg.create_processor("NumberSource")
    assert isinstance(proc, NumberSource)


def test_unknown_class():
    reg = make_test_registry()
    with pytest.raises(UnknownClass):
        reg.create_processor("Ghost")


def test_core_major_version_gate():
    reg = ModuleRegistry(core_version=(1, 0))
    with pytest.raises(VersionMismatch):
        reg.load_module(ModuleDescriptor(name="future", core_version=(2, 0)))
    # newer minor against same major is fine
    reg.load_module(ModuleDescriptor(name="minor", core_version=(1, 7)))


def test_missing_dependency_named():
    reg = ModuleRegistry()
    with pytest.raises(MissingDependency) as excinfo:
        reg.load_module(ModuleDescriptor(name="leaf", dependencies=[("opengl-sim", (1, 0))]))
    assert "opengl-sim" in str(excinfo.value)


def test_dependency_min_version():
    reg = ModuleRegistry()
    reg.load_module(ModuleDescriptor(name="dep", version=(1, 0)))
    with pytest.raises(MissingDependency):
        reg.load_module(ModuleDescriptor(name="leaf", dependencies=[("dep", (1, 5))]))


def test_duplicate_module():
    reg = ModuleRegistry()
    reg.load_module(ModuleDescriptor(name="m"))
    with pytest.raises(DuplicateModule):
        reg.load_module(ModuleDescriptor(name="m"))


def test_failed_load_is_atomic():
    reg = make_test_registry()
    before = registry_fingerprint(reg)

    class Clash(Processor):
        CLASS_ID = "NumberSource"  # collides with the loaded test module

    bad = ModuleDescriptor(name="clash", platforms=[PlatformDecl("newplat")],
                           processors=[Clash])
    with pytest.raises(DuplicateModule):
        reg.load_module(bad)
    assert registry_fingerprint(reg) == before
    assert "newplat" not in reg.platform_registry.platforms


def test_load_unload_load_idempotent():
    reg = ModuleRegistry()
    reg.load_module(ModuleDescriptor(name="cpu", platforms=[PlatformDecl("cpu")]))
    desc = make_module()
    reg.load_module(desc)
    first = registry_fingerprint(reg)
    reg.unload_module("testmod")
    assert not reg.has_class("NumberSource")
    reg.load_module(desc)
    assert registry_fingerprint(reg) == first


def test_unload_blocked_by_dependents():
    reg = ModuleRegistry()
    reg.load_module(ModuleDescriptor(name="core-ish"))
    reg.load_module(ModuleDescriptor(name="leaf", dependencies=[("core-ish", (1, 0))]))
    with pytest.raises(MissingDependency):
        reg.unload_module("core-ish")
    reg.unload_module("leaf")
    reg.unload_module("core-ish")


def test_known_provider_survives_unload():
    reg = make_test_registry()
    reg.unload_module("testmod")
    assert reg.provider_of("NumberSource") == "testmod"


# --- hot reload ------------------------------------------------------------------------


def build_number_net(reg) -> ProcessorNetwork:
    net = ProcessorNetwork(registry=reg)
    net.add_processor("NumberSource", "src")
    net.add_processor("NumberSink", "sink")
    net.set_property("src.value", 21)
    net.add_connection("src", "out", "sink", "in")
    return net


def test_reload_identical_descriptor_preserves_digest():
    reg = make_test_registry()
    net = build_number_net(reg)
    net.evaluate()
    before = digest(net)
    new_net = reg.reload_module(net, "testmod", make_module())
    assert digest(new_net) == before
    for proc in new_net.processors.values():
        assert proc.invalidation == InvalidationLevel.INVALID_RESOURCES
    new_net.evaluate()
    assert new_net.processor("sink").received == 21


def test_reload_dropping_used_class_rolls_back():
    reg = make_test_registry()
    net = build_number_net(reg)
    before_net = digest(net)
    before_reg = registry_fingerprint(reg)
    slim = make_module(processors=[NumberSource])  # drops NumberSink et al.
    with pytest.raises(ReloadFailure) as excinfo:
        reg.reload_module(net, "testmod", slim)
    assert "NumberSink" in excinfo.value.missing_class_ids
    assert digest(net) == before_net
    assert registry_fingerprint(reg) == before_reg
    net.evaluate()  # still functional


def test_reload_with_changed_body_changes_output():
    reg = make_test_registry()
    net = build_number_net(reg)
    net.evaluate()
    assert net.processor("sink").received == 21

    class NumberSourceV2(Processor):
        CLASS_ID = "NumberSource"
        HELP = "Emits twice the `value` property."

        def __init__(self):
            super().__init__()
            self.add_outport("out", "number")
            self.add_property(Property("value", "int", 1))

        def process(self):
            self.outports["out"].data = self.value("value") * 2

    processors = [NumberSourceV2 if cls is NumberSource else cls
                  for cls in make_module().processors]
    new_net = reg.reload_module(net, "testmod", make_module(processors=processors))
    new_net.evaluate()
    assert new_net.processor("sink").received == 42  # property value preserved, new body


def test_reload_not_loaded():
    reg = make_test_registry()
    with pytest.raises(ModuleNotLoaded):
        reg.reload_module(ProcessorNetwork(registry=reg), "ghost", make_module(name="ghost"))


# --- watched resources ---------------------------------------------------------------------


def test_watch_same_bytes_no_event(tmp_path):
    reg = make_test_registry()
    path = tmp_path / "shader.frag"
    path.write_text("void main() {}")
    reg.watch(path, "proc1")
    path.write_text("void main() {}")  # identical contents
    assert reg.poll_watches() == []


def test_watch_change_invalidates_subscribers(tmp_path):
    reg = make_test_registry()
    net = build_number_net(reg)
    net.evaluate()
    path = tmp_path / "shader.frag"
    path.write_text("v1")
    reg.watch(path, "src")
    path.write_text("v2")
    events = reg.poll_watches(net)
    assert len(events) == 1
    assert events[0].subscribers == ("src",)
    assert net.processor("src").invalidation == InvalidationLevel.INVALID_RESOURCES
    # second poll without another change: nothing
    assert reg.poll_watches(net) == []


def test_watch_fan_out_to_two_processors(tmp_path):
    reg = make_test_registry()
    net = build_number_net(reg)
    net.evaluate()
    path = tmp_path / "common.glsl"
    path.write_text("a")
    reg.watch(path, "src")
    reg.watch(path, "sink")
    path.write_text("b")
    events = reg.poll_watches(net)
    assert events[0].subscribers == ("sink", "src")
    assert net.processor("src").invalidation == InvalidationLevel.INVALID_RESOURCES
    assert net.processor("sink").invalidation == InvalidationLevel.INVALID_RESOURCES


def test_watch_unreadable_path(tmp_path):
    reg = make_test_registry()
    with pytest.raises(UnreadablePath):
        reg.watch(tmp_path / "missing.glsl", "src")


def test_manifest_deterministic():
    desc = make_module()
    assert desc.manifest() == desc.manifest()
    assert b'"name":"testmod"' in desc.manifest()
