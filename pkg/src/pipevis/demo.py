"""Ready-made demo pipelines exercising the stdlib catalog.

Used by the CLI (`pipevis serve --demo`), the regression-harness self-tests,
and the editor's integration tests.
"""

from __future__ import annotations

from typing import Callable

from .modules import ModuleRegistry
from .network import ProcessorNetwork


def demo_slice_invert(registry: ModuleRegistry) -> ProcessorNetwork:
    """Volume ramp sliced, inverted, and displayed; spans three platforms."""
    net = ProcessorNetwork(registry=registry)
    net.add_processor("VolumeSource", "source").editor_position = (40, 20)
    net.add_processor("VolumeSlice", "slice").editor_position = (40, 140)
    net.add_processor("ImageInvert", "invert").editor_position = (40, 260)
    net.add_processor("Canvas", "canvas").editor_position = (40, 380)
    net.set_property("source.pattern", "ramp_z")
    net.set_property("source.size", 8)
    net.set_property("slice.sliceIndex", 3)
    net.add_connection("source", "volume", "slice", "volume")
    net.add_connection("slice", "image", "invert", "input")
    net.add_connection("invert", "image", "canvas", "image")
    return net


def demo_noise_blend(registry: ModuleRegistry) -> ProcessorNetwork:
    net = ProcessorNetwork(registry=registry)
    net.add_processor("NoiseImage", "noiseA").editor_position = (20, 20)
    net.add_processor("NoiseImage", "noiseB").editor_position = (220, 20)
    net.add_processor("ImageBlend", "blend").editor_position = (120, 160)
    net.add_processor("Canvas", "canvas").editor_position = (120, 300)
    net.set_property("noiseA.seed", 11)
    net.set_property("noiseB.seed", 12)
    net.set_property("blend.mix", 0.25)
    net.add_connection("noiseA", "image", "blend", "a")
    net.add_connection("noiseB", "image", "blend", "b")
    net.add_connection("blend", "image", "canvas", "image")
    return net


def demo_mip(registry: ModuleRegistry) -> ProcessorNetwork:
    net = ProcessorNetwork(registry=registry)
    net.add_processor("VolumeSource", "source").editor_position = (40, 20)
    net.add_processor("VolumeMIP", "mip").editor_position = (40, 160)
    net.add_processor("Canvas", "canvas").editor_position = (40, 300)
    net.set_property("source.pattern", "noise")
    net.set_property("source.seed", 7)
    net.set_property("source.size", 6)
    net.set_property("mip.axis", "y")
    net.add_connection("source", "volume", "mip", "volume")
    net.add_connection("mip", "image", "canvas", "image")
    return net


def demo_transfer_function(registry: ModuleRegistry) -> ProcessorNetwork:
    net = ProcessorNetwork(registry=registry)
    net.add_processor("VolumeSource", "source").editor_position = (40, 20)
    net.add_processor("TransferFunctionApply", "tf").editor_position = (40, 160)
    net.add_processor("Canvas", "canvas").editor_position = (40, 300)
    net.set_property("source.pattern", "ramp_x")
    net.set_property("source.size", 8)
    net.set_property("tf.tf", [
        [0.0, [0.0, 0.0, 0.4, 1.0]],
        [0.5, [0.9, 0.4, 0.0, 1.0]],
        [1.0, [1.0, 1.0, 0.8, 1.0]],
    ])
    net.set_property("tf.sliceIndex", 4)
    net.add_connection("source", "volume", "tf", "volume")
    net.add_connection("tf", "image", "canvas", "image")
    return net


DEMO_NETWORKS: dict[str, Callable[[ModuleRegistry], ProcessorNetwork]] = {
    "slice-invert": demo_slice_invert,
    "noise-blend": demo_noise_blend,
    "mip": demo_mip,
    "transfer-function": demo_transfer_function,
}
