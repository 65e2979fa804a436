"""Built-in processor catalog.

Every processor here is a pure function of its inport data and property
values. Each declares a ``platform`` property naming the computing platform
its algorithm "runs" on: inputs are requested on that platform and outputs are
homed there, so converter traffic is driven by real pipelines.
"""

from __future__ import annotations

from typing import Iterator, Optional

import numpy as np

from .datacore import DataFormat, NumericType, PlatformRegistry
from .datatypes import (
    ImageData,
    VolumeData,
    load_raw_volume,
    make_box_lines_mesh,
    make_cube_mesh,
    make_image,
    make_volume,
)
from .errors import DimsMismatch, NotEvaluated, SliceOutOfRange, TypeMismatch
from .network import InvalidationLevel, Processor, Property

_AXES = {"x": 0, "y": 1, "z": 2}

MASK64 = (1 << 64) - 1


def xorshift64star(seed: int) -> Iterator[int]:
    """Seedable 64-bit xorshift* stream used by every noise generator.

    The algorithm is fixed so regression references are portable across
    machines: x ^= x >> 12; x ^= x << 25; x ^= x >> 27; return x * M.
    """
    state = seed & MASK64
    if state == 0:
        state = 0x9E3779B97F4A7C15
    while True:
        state ^= state >> 12
        state = (state ^ (state << 25)) & MASK64
        state ^= state >> 27
        yield (state * 0x2545F4914F6CDD1D) & MASK64


def random_bytes(seed: int, count: int) -> np.ndarray:
    gen = xorshift64star(seed)
    words = (count + 7) // 8
    raw = b"".join(next(gen).to_bytes(8, "little") for _ in range(words))
    return np.frombuffer(raw[:count], dtype=np.uint8)


# --- core stdlib operations (directly testable, used by the processors) --------


def volume_slice(volume: VolumeData, axis: str, slice_index: int,
                 platform: str = "cpu") -> ImageData:
    """Extract one axis-aligned slice; output pixels carry the voxel values."""
    if axis not in _AXES:
        raise TypeMismatch(f"axis must be one of x/y/z, got {axis!r}")
    a = _AXES[axis]
    if not 0 <= slice_index < volume.dims[a]:
        raise SliceOutOfRange(f"slice {slice_index} outside axis {axis} of extent {volume.dims[a]}")
    vox = volume.voxels(platform)  # (z, y, x, c)
    if axis == "z":
        plane = vox[slice_index, :, :, :]
        dims = (volume.dims[0], volume.dims[1])
    elif axis == "y":
        plane = vox[:, slice_index, :, :]
        dims = (volume.dims[0], volume.dims[2])
    else:
        plane = vox[:, :, slice_index, :]
        dims = (volume.dims[1], volume.dims[2])
    registry = volume.data.registry
    return make_image(registry, dims, volume.format, home_platform=platform, color_values=plane)


def volume_mip(volume: VolumeData, axis: str, platform: str = "cpu") -> ImageData:
    """Maximum intensity projection along an axis, normalized to uint8.

    Normalization maps the volume's value range onto 0..255 (round half-up);
    a degenerate range (min == max) maps everything to 255.
    """
    if axis not in _AXES:
        raise TypeMismatch(f"axis must be one of x/y/z, got {axis!r}")
    vox = volume.voxels(platform).astype(np.float64)
    if axis == "z":
        projected = vox.max(axis=0)
        dims = (volume.dims[0], volume.dims[1])
    elif axis == "y":
        projected = vox.max(axis=1)
        dims = (volume.dims[0], volume.dims[2])
    else:
        projected = vox.max(axis=2)
        dims = (volume.dims[1], volume.dims[2])
    lo, hi = volume.value_range
    if hi > lo:
        normalized = np.floor((projected - lo) / (hi - lo) * 255.0 + 0.5)
    else:
        normalized = np.full_like(projected, 255.0)
    plane = np.clip(normalized, 0, 255).astype(np.uint8)
    registry = volume.data.registry
    return make_image(registry, dims, DataFormat(NumericType.UINT8, 1),
                      home_platform=platform, color_values=plane)


def image_blend(a: ImageData, b: ImageData, mix: float, platform: str = "cpu") -> ImageData:
    """Per-channel linear blend of the primary color layers: (1-mix)*a + mix*b."""
    if a.dims != b.dims:
        raise DimsMismatch(f"image dims differ: {a.dims} vs {b.dims}")
    if a.color.format != b.color.format:
        raise TypeMismatch("blend inputs must share a color format")
    w, h = a.dims
    fmt = a.color.format
    pa = a.color.read_array(platform).astype(np.float64)
    pb = b.color.read_array(platform).astype(np.float64)
    blended = (1.0 - mix) * pa + mix * pb
    if fmt.numeric_type in (NumericType.UINT8, NumericType.INT32):
        blended = np.floor(blended + 0.5)
    plane = blended.astype(fmt.numeric_type.dtype).reshape(h, w, fmt.components)
    registry = a.color.registry
    out = make_image(registry, a.dims, fmt, home_platform=platform, color_values=plane)
    _copy_aux_layers(a, out, platform)
    return out


def transfer_function_lookup(points: list, t: float) -> tuple[float, float, float, float]:
    """Piecewise-linear color lookup; clamps outside the control points."""
    if not points:
        return (0.0, 0.0, 0.0, 1.0)
    if t <= points[0][0]:
        return tuple(points[0][1])
    if t >= points[-1][0]:
        return tuple(points[-1][1])
    for (p0, c0), (p1, c1) in zip(points, points[1:]):
        if p0 <= t <= p1:
            span = p1 - p0
            f = 0.0 if span == 0 else (t - p0) / span
            return tuple((1 - f) * u + f * v for u, v in zip(c0, c1))
    return tuple(points[-1][1])


def _copy_aux_layers(src: ImageData, dst: ImageData, platform: str) -> None:
    dst.depth_layer.write_array(src.depth_layer.read_array(platform), platform)
    dst.picking_layer.write_array(src.picking_layer.read_array(platform), platform)


def _adapt_slice_bounds(prop: Property, extent: int) -> None:
    # Bounds follow the data so interactive edits and wheel events clamp
    # at the volume's edge; does not invalidate.
    prop.min = 0
    prop.max = extent - 1
    if prop.value > prop.max:
        prop.value = prop.max


# --- processors -----------------------------------------------------------------


class VolumeSource(Processor):
    CLASS_ID = "VolumeSource"
    HELP = (
        "Produces a volume, either synthesized from a named pattern or imported "
        "from a raw file with a key=value sidecar descriptor.\n\n"
        "Patterns: `ramp_x`, `ramp_y`, `ramp_z` (voxel value equals the "
        "coordinate), `constant` (128 everywhere), `noise` (seeded xorshift64star "
        "bytes)."
    )
    PORT_DOCS = {"volume": "The produced volume."}
    PROPERTY_DOCS = {
        "source": "Where the volume comes from: synthetic or file.",
        "pattern": "Synthetic pattern name.",
        "size": "Edge length of the synthetic cube volume.",
        "seed": "Seed for the noise pattern.",
        "path": "Descriptor path for raw import.",
        "platform": "Computing platform the volume is created on.",
    }

    def __init__(self) -> None:
        super().__init__()
        self.add_outport("volume", "volume")
        self.add_property(Property("source", "string", "synthetic", semantics="option",
                                   options=["synthetic", "file"],
                                   invalidation_level=InvalidationLevel.INVALID_RESOURCES))
        self.add_property(Property("pattern", "string", "ramp_z", semantics="option",
                                   options=["ramp_x", "ramp_y", "ramp_z", "constant", "noise"]))
        self.add_property(Property("size", "int", 4, minimum=1, maximum=64))
        self.add_property(Property("seed", "int", 1, minimum=0))
        self.add_property(Property("path", "string", "", semantics="path",
                                   invalidation_level=InvalidationLevel.INVALID_RESOURCES))
        self.add_property(Property("platform", "string", "cpu"))

    def process(self) -> None:
        registry: PlatformRegistry = self.registry.platform_registry
        platform = self.value("platform")
        if self.value("source") == "file":
            volume = load_raw_volume(self.value("path"), registry, platform)
        else:
            n = self.value("size")
            pattern = self.value("pattern")
            fmt = DataFormat(NumericType.UINT8, 1)
            if pattern == "noise":
                vox = random_bytes(self.value("seed"), n * n * n).reshape(n, n, n)
                volume = make_volume(registry, (n, n, n), fmt, home_platform=platform, voxels=vox)
            elif pattern == "constant":
                vox = np.full((n, n, n), 128, dtype=np.uint8)
                volume = make_volume(registry, (n, n, n), fmt, home_platform=platform, voxels=vox)
            else:
                axis = {"ramp_x": lambda x, y, z: x,
                        "ramp_y": lambda x, y, z: y,
                        "ramp_z": lambda x, y, z: z}[pattern]
                volume = make_volume(registry, (n, n, n), fmt, fill_fn=axis, home_platform=platform)
        self.outports["volume"].data = volume


class VolumeSlice(Processor):
    CLASS_ID = "VolumeSlice"
    HELP = (
        "Extracts a single axis-aligned slice from the incoming volume as an "
        "image; pixel values are the voxel values. The slice index bounds adapt "
        "to the connected volume so edits clamp at the last slice."
    )
    PORT_DOCS = {"volume": "Volume to slice.", "image": "The extracted slice."}
    PROPERTY_DOCS = {
        "axis": "Slicing axis.",
        "sliceIndex": "Slice position along the axis.",
        "platform": "Computing platform the slice is computed on.",
    }

    def __init__(self) -> None:
        super().__init__()
        self.add_inport("volume", "volume")
        self.add_outport("image", "image")
        self.add_property(Property("axis", "string", "z", semantics="option", options=["x", "y", "z"]))
        self.add_property(Property("sliceIndex", "int", 0, minimum=0))
        self.add_property(Property("platform", "string", "cpu"))

    def process(self) -> None:
        volume: VolumeData = self.inports["volume"].data
        axis = self.value("axis")
        _adapt_slice_bounds(self.prop("sliceIndex"), volume.dims[_AXES[axis]])
        self.outports["image"].data = volume_slice(volume, axis, self.value("sliceIndex"),
                                                   self.value("platform"))


class VolumeMIP(Processor):
    CLASS_ID = "VolumeMIP"
    HELP = (
        "Maximum intensity projection of the incoming volume along an axis, "
        "normalized to uint8 by the volume's value range (a degenerate range "
        "maps to full brightness)."
    )
    PORT_DOCS = {"volume": "Volume to project.", "image": "The projection."}
    PROPERTY_DOCS = {"axis": "Projection axis.", "platform": "Computing platform used."}

    def __init__(self) -> None:
        super().__init__()
        self.add_inport("volume", "volume")
        self.add_outport("image", "image")
        self.add_property(Property("axis", "string", "z", semantics="option", options=["x", "y", "z"]))
        self.add_property(Property("platform", "string", "cpu"))

    def process(self) -> None:
        self.outports["image"].data = volume_mip(self.inports["volume"].data,
                                                 self.value("axis"), self.value("platform"))


class NoiseImage(Processor):
    CLASS_ID = "NoiseImage"
    HELP = (
        "Generates a deterministic RGBA noise image from a seed using the "
        "xorshift64star stream (alpha is opaque)."
    )
    PORT_DOCS = {"image": "The generated noise."}
    PROPERTY_DOCS = {
        "width": "Image width in pixels.",
        "height": "Image height in pixels.",
        "seed": "Noise seed; equal seeds give byte-identical images.",
        "platform": "Computing platform the image is created on.",
    }

    def __init__(self) -> None:
        super().__init__()
        self.add_outport("image", "image")
        self.add_property(Property("width", "int", 16, minimum=1, maximum=4096))
        self.add_property(Property("height", "int", 16, minimum=1, maximum=4096))
        self.add_property(Property("seed", "int", 1, minimum=0))
        self.add_property(Property("platform", "string", "cpu"))

    def process(self) -> None:
        registry: PlatformRegistry = self.registry.platform_registry
        w, h = self.value("width"), self.value("height")
        rgb = random_bytes(self.value("seed"), w * h * 3).reshape(h, w, 3)
        rgba = np.empty((h, w, 4), dtype=np.uint8)
        rgba[..., :3] = rgb
        rgba[..., 3] = 255
        self.outports["image"].data = make_image(registry, (w, h), DataFormat(NumericType.UINT8, 4),
                                                 home_platform=self.value("platform"), color_values=rgba)


class SolidColorImage(Processor):
    CLASS_ID = "SolidColorImage"
    HELP = (
        "Produces an image filled with one RGBA color (components in [0, 1], "
        "quantized to 8 bit). Useful as a blend background."
    )
    PORT_DOCS = {"image": "The filled image."}
    PROPERTY_DOCS = {
        "width": "Image width in pixels.",
        "height": "Image height in pixels.",
        "color": "Fill color, RGBA in [0, 1].",
        "platform": "Computing platform the image is created on.",
    }

    def __init__(self) -> None:
        super().__init__()
        self.add_outport("image", "image")
        self.add_property(Property("width", "int", 16, minimum=1, maximum=4096))
        self.add_property(Property("height", "int", 16, minimum=1, maximum=4096))
        self.add_property(Property("color", "floatVec4", [0.2, 0.4, 0.8, 1.0],
                                   minimum=0.0, maximum=1.0, semantics="color"))
        self.add_property(Property("platform", "string", "cpu"))

    def process(self) -> None:
        registry: PlatformRegistry = self.registry.platform_registry
        w, h = self.value("width"), self.value("height")
        rgba = np.floor(np.array(self.value("color"), dtype=np.float64) * 255.0 + 0.5).astype(np.uint8)
        plane = np.broadcast_to(rgba, (h, w, 4))
        self.outports["image"].data = make_image(registry, (w, h), DataFormat(NumericType.UINT8, 4),
                                                 home_platform=self.value("platform"),
                                                 color_values=plane.copy())


class ImageInvert(Processor):
    CLASS_ID = "ImageInvert"
    HELP = (
        "Complements every color channel within its display range (255-v for "
        "8-bit, 1-v for float). Four-channel 8-bit images keep their alpha; "
        "depth and picking layers pass through."
    )
    PORT_DOCS = {"input": "Image to invert.", "image": "The inverted image."}
    PROPERTY_DOCS = {"platform": "Computing platform the inversion runs on."}

    def __init__(self) -> None:
        super().__init__()
        self.add_inport("input", "image")
        self.add_outport("image", "image")
        self.add_property(Property("platform", "string", "cpu"))

    def process(self) -> None:
        source: ImageData = self.inports["input"].data
        platform = self.value("platform")
        registry = source.color.registry
        fmt = source.color.format
        w, h = source.dims
        values = source.color.read_array(platform)
        if fmt.numeric_type is NumericType.FLOAT32 or fmt.numeric_type is NumericType.FLOAT64:
            inverted = (1.0 - values).astype(fmt.numeric_type.dtype)
        else:
            inverted = (255 - values.astype(np.int64)).astype(fmt.numeric_type.dtype)
        if fmt.numeric_type is NumericType.UINT8 and fmt.components == 4:
            inverted = inverted.copy()
            inverted[:, 3] = values[:, 3]
        out = make_image(registry, source.dims, fmt, home_platform=platform,
                         color_values=inverted.reshape(h, w, fmt.components))
        _copy_aux_layers(source, out, platform)
        self.outports["image"].data = out


class ImageBlend(Processor):
    CLASS_ID = "ImageBlend"
    HELP = (
        "Linear blend of two images: out = (1-mix)*a + mix*b per color channel, "
        "rounded half-up for integer formats. Inputs must share dimensions."
    )
    PORT_DOCS = {"a": "First image.", "b": "Second image.", "image": "The blended image."}
    PROPERTY_DOCS = {"mix": "Blend factor: 0 yields a, 1 yields b.",
                     "platform": "Computing platform the blend runs on."}

    def __init__(self) -> None:
        super().__init__()
        self.add_inport("a", "image")
        self.add_inport("b", "image")
        self.add_outport("image", "image")
        self.add_property(Property("mix", "float", 0.5, minimum=0.0, maximum=1.0))
        self.add_property(Property("platform", "string", "cpu"))

    def process(self) -> None:
        self.outports["image"].data = image_blend(self.inports["a"].data, self.inports["b"].data,
                                                  self.value("mix"), self.value("platform"))


class MeshSource(Processor):
    CLASS_ID = "MeshSource"
    HELP = "Produces a synthetic cube mesh (8 vertices, 12 triangles)."
    PORT_DOCS = {"mesh": "The cube mesh."}
    PROPERTY_DOCS = {"size": "Cube edge length.", "platform": "Computing platform used."}

    def __init__(self) -> None:
        super().__init__()
        self.add_outport("mesh", "mesh")
        self.add_property(Property("size", "float", 1.0, minimum=0.0))
        self.add_property(Property("platform", "string", "cpu"))

    def process(self) -> None:
        registry: PlatformRegistry = self.registry.platform_registry
        self.outports["mesh"].data = make_cube_mesh(registry, self.value("size"), self.value("platform"))


class BoundingBoxMesh(Processor):
    CLASS_ID = "BoundingBoxMesh"
    HELP = "Builds a line mesh outlining the incoming volume's voxel extents."
    PORT_DOCS = {"volume": "Volume whose bounds are outlined.", "mesh": "12-edge outline mesh."}
    PROPERTY_DOCS = {"platform": "Computing platform used."}

    def __init__(self) -> None:
        super().__init__()
        self.add_inport("volume", "volume")
        self.add_outport("mesh", "mesh")
        self.add_property(Property("platform", "string", "cpu"))

    def process(self) -> None:
        volume: VolumeData = self.inports["volume"].data
        registry = volume.data.registry
        self.outports["mesh"].data = make_box_lines_mesh(registry, volume.dims, self.value("platform"))


class Canvas(Processor):
    CLASS_ID = "Canvas"
    HELP = (
        "Pipeline sink that snapshots the incoming image on the cpu platform. "
        "Regression references and editor previews are captured here."
    )
    PORT_DOCS = {"image": "Image to display/capture."}
    PROPERTY_DOCS = {}

    def __init__(self) -> None:
        super().__init__()
        self.add_inport("image", "image")
        self.captured: Optional[ImageData] = None

    def process(self) -> None:
        self.captured = self.inports["image"].data.clone("cpu")


def canvas_capture(canvas: Canvas) -> ImageData:
    """Deep cpu copy of the canvas snapshot; NotEvaluated before processing."""
    if canvas.captured is None:
        raise NotEvaluated(f"canvas {canvas.identifier or canvas.CLASS_ID} has not been evaluated")
    return canvas.captured.clone("cpu")


class TransferFunctionApply(Processor):
    CLASS_ID = "TransferFunctionApply"
    HELP = (
        "Maps one slice of the incoming volume through a transfer function: "
        "voxel values are normalized by the volume's value range and looked up "
        "in the piecewise-linear color map, producing an RGBA image."
    )
    PORT_DOCS = {"volume": "Volume to colorize.", "image": "Colored slice."}
    PROPERTY_DOCS = {
        "tf": "Transfer function control points (position, RGBA).",
        "axis": "Slicing axis.",
        "sliceIndex": "Slice position along the axis.",
        "platform": "Computing platform used.",
    }

    def __init__(self) -> None:
        super().__init__()
        self.add_inport("volume", "volume")
        self.add_outport("image", "image")
        self.add_property(Property("tf", "transferFunction",
                                   [[0.0, [0.0, 0.0, 0.0, 1.0]], [1.0, [1.0, 1.0, 1.0, 1.0]]]))
        self.add_property(Property("axis", "string", "z", semantics="option", options=["x", "y", "z"]))
        self.add_property(Property("sliceIndex", "int", 0, minimum=0))
        self.add_property(Property("platform", "string", "cpu"))

    def process(self) -> None:
        volume: VolumeData = self.inports["volume"].data
        axis = self.value("axis")
        _adapt_slice_bounds(self.prop("sliceIndex"), volume.dims[_AXES[axis]])
        platform = self.value("platform")
        slice_img = volume_slice(volume, axis, self.value("sliceIndex"), platform)
        w, h = slice_img.dims
        values = slice_img.color.read_array(platform).astype(np.float64)[:, 0]
        lo, hi = volume.value_range
        t = np.ones_like(values) if hi <= lo else np.clip((values - lo) / (hi - lo), 0.0, 1.0)
        points = self.value("tf")
        rgba = np.empty((t.size, 4), dtype=np.uint8)
        lut_in, lut_out = _tf_lut(points)
        for c in range(4):
            rgba[:, c] = np.floor(np.interp(t, lut_in, lut_out[:, c]) * 255.0 + 0.5).astype(np.uint8)
        registry = volume.data.registry
        self.outports["image"].data = make_image(registry, slice_img.dims,
                                                 DataFormat(NumericType.UINT8, 4),
                                                 home_platform=platform,
                                                 color_values=rgba.reshape(h, w, 4))


def _tf_lut(points: list) -> tuple[np.ndarray, np.ndarray]:
    if not points:
        return np.array([0.0, 1.0]), np.array([[0.0, 0.0, 0.0, 1.0]] * 2)
    xs = np.array([p[0] for p in points], dtype=np.float64)
    ys = np.array([p[1] for p in points], dtype=np.float64)
    return xs, ys


STDLIB_PROCESSORS: list[type[Processor]] = [
    VolumeSource,
    VolumeSlice,
    VolumeMIP,
    NoiseImage,
    SolidColorImage,
    ImageInvert,
    ImageBlend,
    MeshSource,
    BoundingBoxMesh,
    Canvas,
    TransferFunctionApply,
]
