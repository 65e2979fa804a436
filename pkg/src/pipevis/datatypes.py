"""Concrete data objects flowing through ports: buffers, images, volumes, meshes.

Layouts are fixed so payload bytes mean the same thing on every simulated
platform: buffers are element-major; images store pixel (u, v) at offset
``u + width * v``; volumes store voxel (x, y, z) at ``x + w * (y + h * z)``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from PIL import Image as PILImage

from .datacore import (
    UINT8_4,
    DataFormat,
    DataObject,
    NumericType,
    PlatformRegistry,
    RepresentationKind,
)
from .errors import InvalidDims, MalformedDescriptor, OutOfRange


class BufferData:
    """Arbitrary element data backed by a buffer-kind data object."""

    tag = "buffer"

    def __init__(self, data: DataObject, length: int):
        self.data = data
        self.length = length
        self.format = data.format

    @classmethod
    def from_array(cls, registry: PlatformRegistry, values: np.ndarray, fmt: DataFormat,
                   home_platform: str = "cpu") -> "BufferData":
        arr = np.ascontiguousarray(values, dtype=fmt.numeric_type.dtype).reshape(-1, fmt.components)
        obj = DataObject(registry, RepresentationKind.BUFFER, fmt, (arr.shape[0],), arr.tobytes(), home_platform)
        return cls(obj, arr.shape[0])

    def clone(self, home_platform: str = "cpu") -> "BufferData":
        return BufferData(self.data.clone(home_platform), self.length)


class ImageData:
    """Layered 2D image: ordered color layers plus depth and picking layers.

    All layers share ``dims``. The depth layer is single-component float32
    initialized to 1.0 (far plane); the picking layer holds uint8x4 ids
    initialized to zero.
    """

    tag = "image"

    def __init__(self, color_layers: list[DataObject], depth_layer: DataObject,
                 picking_layer: DataObject, dims: tuple[int, int]):
        if not color_layers:
            raise InvalidDims("an image needs at least one color layer")
        for layer in [*color_layers, depth_layer, picking_layer]:
            if layer.dims != tuple(dims):
                raise InvalidDims(f"layer dims {layer.dims} != image dims {dims}")
        self.color_layers = list(color_layers)
        self.depth_layer = depth_layer
        self.picking_layer = picking_layer
        self.dims = tuple(dims)

    @property
    def color(self) -> DataObject:
        return self.color_layers[0]

    @property
    def layers(self) -> list[tuple[str, DataObject]]:
        named = [(f"color{i}" if i else "color", layer) for i, layer in enumerate(self.color_layers)]
        return named + [("depth", self.depth_layer), ("picking", self.picking_layer)]

    def color_array(self, platform: str = "cpu") -> np.ndarray:
        """Color layer 0 decoded as (height, width, components)."""
        w, h = self.dims
        return self.color.read_array(platform).reshape(h, w, self.color.format.components)

    def clone(self, home_platform: str = "cpu") -> "ImageData":
        return ImageData(
            [layer.clone(home_platform) for layer in self.color_layers],
            self.depth_layer.clone(home_platform),
            self.picking_layer.clone(home_platform),
            self.dims,
        )


class VolumeData:
    """3D scalar/vector field backed by a 3D-texture-kind data object."""

    tag = "volume"

    def __init__(self, data: DataObject, dims: tuple[int, int, int], value_range: tuple[float, float]):
        if value_range[0] > value_range[1]:
            raise ValueError("value_range min must be <= max")
        self.data = data
        self.dims = tuple(dims)
        self.format = data.format
        self.value_range = (float(value_range[0]), float(value_range[1]))

    def voxels(self, platform: str = "cpu") -> np.ndarray:
        """Decoded as (z, y, x, components) matching the payload layout."""
        w, h, d = self.dims
        return self.data.read_array(platform).reshape(d, h, w, self.format.components)

    def clone(self, home_platform: str = "cpu") -> "VolumeData":
        return VolumeData(self.data.clone(home_platform), self.dims, self.value_range)


@dataclass
class MeshData:
    """Named attribute buffers plus typed index buffers.

    ``positions`` (float32x3) is mandatory; every index must address a valid
    position.
    """

    tag = "mesh"
    attribute_buffers: dict[str, BufferData] = field(default_factory=dict)
    index_buffers: list[tuple[str, BufferData]] = field(default_factory=list)

    PRIMITIVES = ("points", "lines", "triangles")

    def __post_init__(self) -> None:
        positions = self.attribute_buffers.get("positions")
        if positions is None:
            raise InvalidDims("mesh requires a 'positions' attribute buffer")
        if positions.format != DataFormat(NumericType.FLOAT32, 3):
            raise InvalidDims("positions must be float32x3")
        count = positions.length
        for primitive, buf in self.index_buffers:
            if primitive not in self.PRIMITIVES:
                raise InvalidDims(f"unknown primitive type {primitive!r}")
            if buf.format.numeric_type not in (NumericType.UINT8, NumericType.INT32):
                raise InvalidDims("index buffers must hold integer elements")
            indices = buf.data.read_array().ravel()
            if indices.size and (indices.min() < 0 or indices.max() >= count):
                raise OutOfRange(f"index buffer references vertex outside 0..{count - 1}")

    @property
    def vertex_count(self) -> int:
        return self.attribute_buffers["positions"].length

    def clone(self, home_platform: str = "cpu") -> "MeshData":
        return MeshData(
            {name: buf.clone(home_platform) for name, buf in self.attribute_buffers.items()},
            [(primitive, buf.clone(home_platform)) for primitive, buf in self.index_buffers],
        )


# --- constructors -------------------------------------------------------------


def make_volume(registry: PlatformRegistry, dims: tuple[int, int, int], fmt: DataFormat,
                fill_fn: Optional[Callable[[int, int, int], float]] = None,
                home_platform: str = "cpu",
                voxels: Optional[np.ndarray] = None) -> VolumeData:
    """Create a volume on ``home_platform``, value range scanned from the data.

    Either ``fill_fn(x, y, z) -> value`` or a prebuilt ``voxels`` array of
    shape (d, h, w) or (d, h, w, components) may supply the contents.
    """
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise InvalidDims(f"volume dims must be three extents >= 1, got {dims}")
    registry.require_platform(home_platform)
    w, h, d = dims
    if voxels is None:
        fill = fill_fn if fill_fn is not None else (lambda x, y, z: 0)
        zz, yy, xx = np.meshgrid(np.arange(d), np.arange(h), np.arange(w), indexing="ij")
        voxels = np.vectorize(fill)(xx, yy, zz)
    arr = np.asarray(voxels)
    if arr.ndim == 3:
        arr = arr[..., np.newaxis]
    if arr.shape[:3] != (d, h, w) or arr.shape[3] != fmt.components:
        raise InvalidDims(f"voxel array shape {arr.shape} does not match dims {dims} x {fmt.components}")
    arr = np.ascontiguousarray(arr, dtype=fmt.numeric_type.dtype)
    obj = DataObject(registry, RepresentationKind.TEXTURE3D, fmt, dims, arr.tobytes(), home_platform)
    return VolumeData(obj, dims, (float(arr.min()), float(arr.max())))


def make_image(registry: PlatformRegistry, dims: tuple[int, int], color_format: DataFormat = UINT8_4,
               home_platform: str = "cpu", color_values: Optional[np.ndarray] = None) -> ImageData:
    """Create an image with one color layer plus depth (1.0) and picking (0)."""
    if len(dims) != 2 or any(d < 1 for d in dims):
        raise InvalidDims(f"image dims must be two extents >= 1, got {dims}")
    registry.require_platform(home_platform)
    w, h = dims
    if color_values is None:
        color = np.zeros((h, w, color_format.components), dtype=color_format.numeric_type.dtype)
    else:
        color = np.asarray(color_values)
        if color.ndim == 2:
            color = color[..., np.newaxis]
        if color.shape != (h, w, color_format.components):
            raise InvalidDims(f"color array shape {color.shape} does not match {dims} x {color_format.components}")
        color = np.ascontiguousarray(color, dtype=color_format.numeric_type.dtype)
    color_obj = DataObject(registry, RepresentationKind.TEXTURE2D, color_format, dims,
                           color.tobytes(), home_platform)
    depth = np.ones((h, w, 1), dtype=np.float32)
    depth_obj = DataObject(registry, RepresentationKind.TEXTURE2D, DataFormat(NumericType.FLOAT32, 1),
                           dims, depth.tobytes(), home_platform)
    picking = np.zeros((h, w, 4), dtype=np.uint8)
    picking_obj = DataObject(registry, RepresentationKind.TEXTURE2D, UINT8_4, dims,
                             picking.tobytes(), home_platform)
    return ImageData([color_obj], depth_obj, picking_obj, (w, h))


def make_cube_mesh(registry: PlatformRegistry, size: float = 1.0, home_platform: str = "cpu") -> MeshData:
    """Unit cube: 8 vertices, 12 triangles."""
    s = float(size)
    corners = np.array([[x, y, z] for z in (0.0, s) for y in (0.0, s) for x in (0.0, s)], dtype=np.float32)
    positions = BufferData.from_array(registry, corners, DataFormat(NumericType.FLOAT32, 3), home_platform)
    faces = np.array([
        0, 1, 3, 0, 3, 2,  # z = 0
        4, 6, 7, 4, 7, 5,  # z = s
        0, 4, 5, 0, 5, 1,  # y = 0
        2, 3, 7, 2, 7, 6,  # y = s
        0, 2, 6, 0, 6, 4,  # x = 0
        1, 5, 7, 1, 7, 3,  # x = s
    ], dtype=np.int32)
    indices = BufferData.from_array(registry, faces, DataFormat(NumericType.INT32, 1), home_platform)
    return MeshData({"positions": positions}, [("triangles", indices)])


def make_box_lines_mesh(registry: PlatformRegistry, extents: tuple[float, float, float],
                        home_platform: str = "cpu") -> MeshData:
    """Axis-aligned box outline (12 edges) spanning origin..extents."""
    ex, ey, ez = (float(v) for v in extents)
    corners = np.array([[x, y, z] for z in (0.0, ez) for y in (0.0, ey) for x in (0.0, ex)], dtype=np.float32)
    positions = BufferData.from_array(registry, corners, DataFormat(NumericType.FLOAT32, 3), home_platform)
    edges = np.array([
        0, 1, 2, 3, 4, 5, 6, 7,  # x-aligned
        0, 2, 1, 3, 4, 6, 5, 7,  # y-aligned
        0, 4, 1, 5, 2, 6, 3, 7,  # z-aligned
    ], dtype=np.int32)
    indices = BufferData.from_array(registry, edges, DataFormat(NumericType.INT32, 1), home_platform)
    return MeshData({"positions": positions}, [("lines", indices)])


# --- element access -------------------------------------------------------------


def element_at(obj: "BufferData | VolumeData", index) -> float | tuple[float, ...]:
    """Read one element through the cpu representation (test/debug oracle access)."""
    if isinstance(obj, BufferData):
        i = int(index)
        if not 0 <= i < obj.length:
            raise OutOfRange(f"index {i} outside buffer of length {obj.length}")
        row = obj.data.read_array("cpu")[i]
    elif isinstance(obj, VolumeData):
        x, y, z = (int(v) for v in index)
        w, h, d = obj.dims
        if not (0 <= x < w and 0 <= y < h and 0 <= z < d):
            raise OutOfRange(f"voxel {(x, y, z)} outside volume {obj.dims}")
        row = obj.voxels("cpu")[z, y, x]
    else:
        raise TypeError(f"element_at expects BufferData or VolumeData, got {type(obj).__name__}")
    values = tuple(v.item() for v in row)
    return values[0] if len(values) == 1 else values


# --- raw volume import -----------------------------------------------------------

_NUMERIC_TYPES = {t.value: t for t in NumericType}


def load_raw_volume(descriptor_path: str | Path, registry: PlatformRegistry,
                    home_platform: str = "cpu") -> VolumeData:
    """Import a little-endian .raw volume via its key=value sidecar descriptor.

    Descriptor keys: ``raw`` (payload filename, relative to the descriptor),
    ``dims`` ("w h d"), ``format`` ("<numeric_type> <components>"), and
    optional ``endianness`` (only "little" is supported).
    """
    path = Path(descriptor_path)
    entries: dict[str, str] = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedDescriptor(f"cannot read descriptor {path}: {exc}") from exc
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise MalformedDescriptor(f"expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()

    for required in ("raw", "dims", "format"):
        if required not in entries:
            raise MalformedDescriptor(f"descriptor missing required key {required!r}")
    if entries.get("endianness", "little") != "little":
        raise MalformedDescriptor("only little-endian raw volumes are supported")
    try:
        dims = tuple(int(v) for v in entries["dims"].split())
        type_name, comp = entries["format"].split()
        fmt = DataFormat(_NUMERIC_TYPES[type_name], int(comp))
    except (ValueError, KeyError) as exc:
        raise MalformedDescriptor(f"bad dims/format in descriptor: {exc}") from exc
    if len(dims) != 3:
        raise MalformedDescriptor(f"dims must have three extents, got {entries['dims']!r}")

    raw_path = path.parent / entries["raw"]
    payload = raw_path.read_bytes()
    expected = math.prod(dims) * fmt.bytes_per_element
    if len(payload) != expected:
        raise MalformedDescriptor(f"raw payload is {len(payload)} bytes, descriptor implies {expected}")
    w, h, d = dims
    arr = np.frombuffer(payload, dtype=fmt.numeric_type.dtype).reshape(d, h, w, fmt.components)
    return make_volume(registry, dims, fmt, home_platform=home_platform, voxels=arr)


# --- display quantization ----------------------------------------------------------


def render_rgba8(image: ImageData, layer: str = "color", platform: str = "cpu") -> np.ndarray:
    """Quantize a layer to (h, w, 4) uint8 for PNG capture and previews.

    uint8 channels pass through; float channels are clamped to [0, 1] and
    scaled by 255 with round-half-up; int32 channels are clamped to [0, 255].
    Missing channels replicate gray and alpha fills with 255.
    """
    sources = dict(image.layers)
    if layer not in sources:
        raise KeyError(f"image has no layer {layer!r}")
    obj = sources[layer]
    w, h = image.dims
    arr = obj.read_array(platform).reshape(h, w, obj.format.components)
    if obj.format.numeric_type is NumericType.UINT8:
        quantized = arr.astype(np.uint8)
    elif obj.format.numeric_type is NumericType.INT32:
        quantized = np.clip(arr, 0, 255).astype(np.uint8)
    else:
        quantized = np.floor(np.clip(arr.astype(np.float64), 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)

    out = np.empty((h, w, 4), dtype=np.uint8)
    comps = quantized.shape[2]
    if comps == 1:
        out[..., 0] = out[..., 1] = out[..., 2] = quantized[..., 0]
        out[..., 3] = 255
    elif comps == 2:
        out[..., 0] = out[..., 1] = out[..., 2] = quantized[..., 0]
        out[..., 3] = quantized[..., 1]
    elif comps == 3:
        out[..., :3] = quantized
        out[..., 3] = 255
    else:
        out[:] = quantized
    return out


def encode_png(rgba: np.ndarray) -> bytes:
    """RGBA8 (h, w, 4) array to PNG bytes."""
    buf = io.BytesIO()
    PILImage.fromarray(np.ascontiguousarray(rgba, dtype=np.uint8), mode="RGBA").save(buf, format="PNG")
    return buf.getvalue()


def decode_png(data: bytes | Path) -> np.ndarray:
    """PNG bytes or file path to an RGBA8 (h, w, 4) array."""
    source = io.BytesIO(data) if isinstance(data, (bytes, bytearray)) else data
    with PILImage.open(source) as img:
        return np.asarray(img.convert("RGBA"), dtype=np.uint8)
