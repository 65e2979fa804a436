"""Platform registry, representations, converters, and converter packages.

Data objects own one representation of their payload per (simulated) computing
platform. A representation is created lazily when first requested, cached
afterwards, and refreshed through converters when stale. Converters form a
weighted graph per representation kind; requesting data on a platform where no
valid representation lives walks the cheapest converter package from a valid
source.

Simulated platforms keep their payloads in separate byte stores so every
transfer is observable; a shared platform aliases its host's store, making
host<->shared conversions zero-copy.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import (
    DuplicatePlatform,
    KindMismatch,
    NoConversionPath,
    NoValidSource,
    SharedHostViolation,
    UnknownPlatform,
    UnsupportedFormat,
)


class RepresentationKind(Enum):
    """The three fundamental hardware-backed data shapes."""

    BUFFER = "buffer"
    TEXTURE2D = "texture2d"
    TEXTURE3D = "texture3d"


class NumericType(Enum):
    UINT8 = "uint8"
    INT32 = "int32"
    FLOAT32 = "float32"
    FLOAT64 = "float64"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype({"uint8": "<u1", "int32": "<i4", "float32": "<f4", "float64": "<f8"}[self.value])


@dataclass(frozen=True)
class DataFormat:
    """Element format of a representation: numeric type x component count."""

    numeric_type: NumericType
    components: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.components <= 4:
            raise ValueError(f"components must be 1..4, got {self.components}")

    @property
    def bytes_per_element(self) -> int:
        return self.components * self.numeric_type.dtype.itemsize

    def describe(self) -> str:
        return f"{self.numeric_type.value}x{self.components}"


UINT8_1 = DataFormat(NumericType.UINT8, 1)
UINT8_4 = DataFormat(NumericType.UINT8, 4)
FLOAT32_1 = DataFormat(NumericType.FLOAT32, 1)


@dataclass(frozen=True)
class RepKey:
    """Node identity in the converter graph: which platform, which kind."""

    platform: str
    kind: RepresentationKind


class Representation:
    """One platform-specific incarnation of a data object's contents.

    ``payload`` is the platform's byte store. A stale representation
    (``valid == False``) keeps its allocation so a later refresh can reuse it.
    """

    def __init__(self, key: RepKey, fmt: DataFormat, dims: tuple[int, ...], payload: bytearray, valid: bool = True):
        expected = math.prod(dims) * fmt.bytes_per_element
        if len(payload) != expected:
            raise ValueError(f"payload size {len(payload)} != dims x format size {expected}")
        self.key = key
        self.format = fmt
        self.dims = tuple(dims)
        self.payload = payload
        self.valid = valid

    def as_array(self) -> np.ndarray:
        """Decode the payload into an element-major numpy view (copy-free)."""
        count = math.prod(self.dims)
        arr = np.frombuffer(self.payload, dtype=self.format.numeric_type.dtype)
        return arr.reshape(count, self.format.components)

    def write_array(self, values: np.ndarray) -> None:
        data = np.ascontiguousarray(values, dtype=self.format.numeric_type.dtype).tobytes()
        if len(data) != len(self.payload):
            raise ValueError("array does not match representation size")
        self.payload[:] = data


@dataclass
class Converter:
    """Directed edge in the converter graph.

    ``create`` allocates a fresh destination representation from the source;
    ``update`` refreshes an existing destination allocation in place. Both
    count as one transfer. ``format_predicate`` may reject formats the edge
    cannot carry (UnsupportedFormat at request time).
    """

    src: RepKey
    dst: RepKey
    cost: int = 1
    create: Callable[[Representation], Representation] = None  # type: ignore[assignment]
    update: Callable[[Representation, Representation], Representation] = None  # type: ignore[assignment]
    format_predicate: Optional[Callable[[DataFormat], bool]] = None
    create_count: int = field(default=0, compare=False)
    update_count: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if self.cost < 0:
            raise ValueError("converter cost must be non-negative")
        if self.src.kind is not self.dst.kind:
            raise KindMismatch(f"converter kinds differ: {self.src.kind} -> {self.dst.kind}")


def copy_converter(src: RepKey, dst: RepKey, cost: int = 1,
                   format_predicate: Optional[Callable[[DataFormat], bool]] = None) -> Converter:
    """Converter between distinct address spaces: bytes are copied."""

    def create(rep: Representation) -> Representation:
        return Representation(dst, rep.format, rep.dims, bytearray(rep.payload))

    def update(rep: Representation, existing: Representation) -> Representation:
        existing.payload[:] = rep.payload
        return existing

    return Converter(src=src, dst=dst, cost=cost, create=create, update=update,
                     format_predicate=format_predicate)


def alias_converter(src: RepKey, dst: RepKey, cost: int = 0,
                    format_predicate: Optional[Callable[[DataFormat], bool]] = None) -> Converter:
    """Converter between platforms sharing one byte store (zero copy).

    Used in both directions between a shared platform and its host: creating a
    shared view hands out the host's payload object, and updates are no-ops
    because both keys already see the same bytes.
    """

    def create(rep: Representation) -> Representation:
        return Representation(dst, rep.format, rep.dims, rep.payload)

    def update(rep: Representation, existing: Representation) -> Representation:
        if existing.payload is not rep.payload:
            # aliasing was broken (e.g. the view predates a reallocation)
            existing.payload[:] = rep.payload
        return existing

    return Converter(src=src, dst=dst, cost=cost, create=create, update=update,
                     format_predicate=format_predicate)


@dataclass(frozen=True)
class ConverterPackage:
    """Ordered converter path between two representation keys."""

    steps: tuple[Converter, ...]
    total_cost: int

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def platforms(self) -> tuple[str, ...]:
        """Platform ids visited, source first, destination last."""
        if not self.steps:
            return ()
        return (self.steps[0].src.platform,) + tuple(s.dst.platform for s in self.steps)


class PlatformRegistry:
    """Registered platforms, converter graph, and cached converter packages.

    Packages are recomputed lazily; registering a converter invalidates every
    cached package of that kind. The registry is expected to be fully built
    during module loading and treated as read-only afterwards.
    """

    def __init__(self) -> None:
        self._platforms: dict[str, None] = {}
        self._shared_hosts: dict[str, str] = {}
        self._converters: dict[RepresentationKind, dict[tuple[str, str], Converter]] = {
            kind: {} for kind in RepresentationKind
        }
        self._package_cache: dict[RepresentationKind, dict[tuple[str, str], ConverterPackage]] = {
            kind: {} for kind in RepresentationKind
        }

    # --- platforms ---------------------------------------------------------

    @property
    def platforms(self) -> list[str]:
        return list(self._platforms)

    def register_platform(self, platform_id: str) -> None:
        if not platform_id:
            raise ValueError("platform id must be non-empty")
        if platform_id in self._platforms:
            raise DuplicatePlatform(platform_id)
        self._platforms[platform_id] = None

    def unregister_platform(self, platform_id: str) -> None:
        self.require_platform(platform_id)
        del self._platforms[platform_id]
        self._shared_hosts.pop(platform_id, None)
        for kind in RepresentationKind:
            edges = self._converters[kind]
            for pair in [p for p in edges if platform_id in p]:
                del edges[pair]
            self._package_cache[kind].clear()

    def require_platform(self, platform_id: str) -> None:
        if platform_id not in self._platforms:
            raise UnknownPlatform(platform_id)

    def shared_platform_constraint(self, shared_id: str, host_id: str) -> None:
        """Restrict converters into ``shared_id`` to originate from ``host_id``.

        Packages into the shared platform then necessarily route via the host.
        """
        self.require_platform(shared_id)
        self.require_platform(host_id)
        offenders = [
            pair for kind in RepresentationKind for pair in self._converters[kind]
            if pair[1] == shared_id and pair[0] != host_id
        ]
        if offenders:
            raise SharedHostViolation(
                f"existing converters into {shared_id} violate host {host_id}: {sorted(set(offenders))}")
        self._shared_hosts[shared_id] = host_id

    @property
    def shared_hosts(self) -> dict[str, str]:
        return dict(self._shared_hosts)

    # --- converters ----------------------------------------------------------

    def register_converter(self, conv: Converter) -> None:
        self.require_platform(conv.src.platform)
        self.require_platform(conv.dst.platform)
        if conv.src.kind is not conv.dst.kind:
            raise KindMismatch(f"{conv.src.kind} -> {conv.dst.kind}")
        host = self._shared_hosts.get(conv.dst.platform)
        if host is not None and conv.src.platform != host:
            raise SharedHostViolation(
                f"converters into shared platform {conv.dst.platform} must come from {host}")
        kind = conv.src.kind
        self._converters[kind][(conv.src.platform, conv.dst.platform)] = conv
        self._package_cache[kind].clear()

    def unregister_converters(self, convs: Iterable[Converter]) -> None:
        for conv in convs:
            kind = conv.src.kind
            pair = (conv.src.platform, conv.dst.platform)
            if self._converters[kind].get(pair) is conv:
                del self._converters[kind][pair]
                self._package_cache[kind].clear()

    def converter_count(self, kind: RepresentationKind) -> int:
        return len(self._converters[kind])

    # --- package computation --------------------------------------------------

    def compute_package(self, src: RepKey, dst: RepKey) -> ConverterPackage:
        """Cheapest converter path from ``src`` to ``dst``.

        Tie-breaking is deterministic: minimal total cost, then fewest steps,
        then the lexicographically smallest sequence of visited platform ids.
        """
        self.require_platform(src.platform)
        self.require_platform(dst.platform)
        if src.kind is not dst.kind:
            raise KindMismatch(f"{src.kind} -> {dst.kind}")
        if src.platform == dst.platform:
            return ConverterPackage(steps=(), total_cost=0)

        cache = self._package_cache[src.kind]
        cached = cache.get((src.platform, dst.platform))
        if cached is not None:
            return cached

        edges = self._converters[src.kind]
        adjacency: dict[str, list[tuple[str, Converter]]] = {}
        for (a, b), conv in edges.items():
            adjacency.setdefault(a, []).append((b, conv))
        for nexts in adjacency.values():
            nexts.sort(key=lambda e: e[0])

        # Best-first search over (cost, steps, visited-platform sequence)
        # labels. Labels of path prefixes always compare <= their extensions
        # (costs are non-negative and tuple prefixes sort first), so the first
        # label popped at the destination is the global minimum. Paths are
        # kept simple; graphs are small by construction.
        heap: list[tuple[int, int, tuple[str, ...]]] = [(0, 0, (src.platform,))]
        while heap:
            cost, steps, path = heapq.heappop(heap)
            node = path[-1]
            if node == dst.platform:
                convs = tuple(edges[(path[i], path[i + 1])] for i in range(len(path) - 1))
                package = ConverterPackage(steps=convs, total_cost=cost)
                cache[(src.platform, dst.platform)] = package
                return package
            for nxt, conv in adjacency.get(node, ()):
                if nxt in path:
                    continue
                heapq.heappush(heap, (cost + conv.cost, steps + 1, path + (nxt,)))
        raise NoConversionPath(f"{src.platform} -> {dst.platform} ({src.kind.value})")


class AccessMode(Enum):
    READ = "read"
    WRITE = "write"


class DataObject:
    """Owner of per-platform representations with read/write semantics.

    Reads guarantee a valid representation on the requested platform, creating
    or refreshing it via the cheapest converter package from a valid source.
    Writes additionally invalidate every sibling representation, making the
    written one the sole valid member. ``transfer_counter`` counts converter
    invocations (creates plus updates) and never decreases.

    Not safe for concurrent access; callers serialize requests per object.
    """

    def __init__(self, registry: PlatformRegistry, kind: RepresentationKind, fmt: DataFormat,
                 dims: tuple[int, ...], initial: bytes | bytearray, home_platform: str):
        registry.require_platform(home_platform)
        self.registry = registry
        self.kind = kind
        self.format = fmt
        self.dims = tuple(dims)
        self.transfer_counter = 0
        home = Representation(RepKey(home_platform, kind), fmt, self.dims, bytearray(initial))
        self._reps: dict[str, Representation] = {home_platform: home}

    @property
    def valid_platforms(self) -> set[str]:
        return {p for p, rep in self._reps.items() if rep.valid}

    @property
    def platforms(self) -> set[str]:
        return set(self._reps)

    def representation(self, platform: str) -> Optional[Representation]:
        """Peek at a representation without triggering conversions."""
        return self._reps.get(platform)

    def get_representation(self, platform: str, mode: AccessMode = AccessMode.READ) -> Representation:
        self.registry.require_platform(platform)
        valid_sources = sorted(self.valid_platforms)
        if not valid_sources:
            raise NoValidSource("data object has no valid representation")

        target = self._reps.get(platform)
        if target is not None and target.valid:
            rep = target
        else:
            rep = self._materialize(platform, valid_sources)

        if mode is AccessMode.WRITE:
            for p, sibling in self._reps.items():
                sibling.valid = p == platform
        return rep

    def _materialize(self, platform: str, valid_sources: list[str]) -> Representation:
        # Pick the valid source with the cheapest package; ties fall to fewer
        # steps, then the lexicographically smallest source platform id
        # (sources are iterated pre-sorted with a strict comparison).
        best: Optional[tuple[tuple[int, int], str, ConverterPackage]] = None
        for source in valid_sources:
            try:
                package = self.registry.compute_package(RepKey(source, self.kind), RepKey(platform, self.kind))
            except NoConversionPath:
                continue
            rank = (package.total_cost, len(package.steps))
            if best is None or rank < best[0]:
                best = (rank, source, package)
        if best is None:
            raise NoConversionPath(f"no path to {platform} from any valid source of kind {self.kind.value}")
        _, source, package = best

        for conv in package.steps:
            if conv.format_predicate is not None and not conv.format_predicate(self.format):
                raise UnsupportedFormat(
                    f"converter {conv.src.platform}->{conv.dst.platform} rejects format {self.format.describe()}")

        current = self._reps[source]
        for conv in package.steps:
            existing = self._reps.get(conv.dst.platform)
            if existing is None:
                produced = conv.create(current)
                conv.create_count += 1
            else:
                produced = conv.update(current, existing)
                conv.update_count += 1
            produced.valid = True
            self._reps[conv.dst.platform] = produced
            self.transfer_counter += 1
            current = produced
        return current

    # --- convenience accessors ------------------------------------------------

    def read_array(self, platform: str = "cpu") -> np.ndarray:
        return self.get_representation(platform, AccessMode.READ).as_array()

    def write_array(self, values: np.ndarray, platform: str = "cpu") -> None:
        rep = self.get_representation(platform, AccessMode.WRITE)
        rep.write_array(values)

    def clone(self, home_platform: str = "cpu") -> "DataObject":
        """Deep copy with a single valid representation on ``home_platform``."""
        rep = self.get_representation(home_platform, AccessMode.READ)
        return DataObject(self.registry, self.kind, self.format, self.dims,
                          bytes(rep.payload), home_platform)
