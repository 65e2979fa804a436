from __future__ import annotations

import pytest

from pipevis.builtins import default_module_registry
from pipevis.datacore import PlatformRegistry, RepKey, RepresentationKind, copy_converter


@pytest.fixture
def registry():
    """Fresh default module registry (the 4-platform demo graph)."""
    return default_module_registry()


@pytest.fixture
def platform_registry():
    """Bare platform registry with just cpu."""
    reg = PlatformRegistry()
    reg.register_platform("cpu")
    return reg


def build_example_graph(kind: RepresentationKind = RepresentationKind.TEXTURE2D) -> PlatformRegistry:
    """The richer unit-test converter graph (cl/gl sharing shortcut, no host
    constraint): cpu<->glsim 10, cpu<->clsim 10, glsim<->sharedsim 1,
    sharedsim<->clsim 0."""
    reg = PlatformRegistry()
    for platform in ("cpu", "glsim", "clsim", "sharedsim"):
        reg.register_platform(platform)
    edges = [
        ("cpu", "glsim", 10), ("glsim", "cpu", 10),
        ("cpu", "clsim", 10), ("clsim", "cpu", 10),
        ("glsim", "sharedsim", 1), ("sharedsim", "glsim", 1),
        ("sharedsim", "clsim", 0), ("clsim", "sharedsim", 0),
    ]
    for src, dst, cost in edges:
        reg.register_converter(copy_converter(RepKey(src, kind), RepKey(dst, kind), cost))
    return reg


@pytest.fixture
def example_graph():
    return build_example_graph()
