from __future__ import annotations

import random

import numpy as np
import pytest

from pipevis.datacore import (
    FLOAT32_1,
    UINT8_1,
    AccessMode,
    DataFormat,
    DataObject,
    NumericType,
    PlatformRegistry,
    RepKey,
    RepresentationKind,
    copy_converter,
)
from pipevis.errors import (
    DuplicatePlatform,
    KindMismatch,
    NoConversionPath,
    NoValidSource,
    SharedHostViolation,
    UnknownPlatform,
    UnsupportedFormat,
)

from .conftest import build_example_graph
from .oracles import best_from_sources, best_path

T2 = RepresentationKind.TEXTURE2D
B = RepresentationKind.BUFFER


def key(platform: str, kind=T2) -> RepKey:
    return RepKey(platform, kind)


def make_object(reg: PlatformRegistry, home: str = "cpu", n: int = 16) -> DataObject:
    payload = bytes(range(n))
    return DataObject(reg, B, UINT8_1, (n,), payload, home)


def buffer_graph() -> PlatformRegistry:
    return build_example_graph(B)


# --- platforms -----------------------------------------------------------------


def test_register_platform_base_case():
    reg = PlatformRegistry()
    reg.register_platform("cpu")
    assert reg.platforms == ["cpu"]


def test_register_platform_twice_is_rejected():
    reg = PlatformRegistry()
    reg.register_platform("cpu")
    with pytest.raises(DuplicatePlatform):
        reg.register_platform("cpu")


def test_four_platforms_registered():
    reg = PlatformRegistry()
    for p in ("cpu", "glsim", "clsim", "sharedsim"):
        reg.register_platform(p)
    assert reg.platforms == ["cpu", "glsim", "clsim", "sharedsim"]


# --- converter registration --------------------------------------------------------


def test_register_converter_adds_edge():
    reg = PlatformRegistry()
    reg.register_platform("cpu")
    reg.register_platform("glsim")
    reg.register_converter(copy_converter(key("cpu"), key("glsim"), 10))
    assert reg.converter_count(T2) == 1


def test_register_converter_kind_mismatch():
    reg = PlatformRegistry()
    reg.register_platform("cpu")
    reg.register_platform("glsim")
    with pytest.raises(KindMismatch):
        copy_converter(RepKey("cpu", B), RepKey("glsim", T2))


def test_register_converter_unknown_platform():
    reg = PlatformRegistry()
    reg.register_platform("cpu")
    with pytest.raises(UnknownPlatform):
        reg.register_converter(copy_converter(key("cpu"), key("vulkansim")))


def test_cached_package_recomputed_after_new_converter():
    # Start without the glsim->sharedsim shortcut, cache cpu->clsim, then add
    # the shortcut and verify the recomputed package matches brute force.
    reg = PlatformRegistry()
    for p in ("cpu", "glsim", "clsim", "sharedsim"):
        reg.register_platform(p)
    edges = {
        ("cpu", "glsim"): 10, ("glsim", "cpu"): 10,
        ("cpu", "clsim"): 10, ("clsim", "cpu"): 10,
        ("sharedsim", "clsim"): 0, ("clsim", "sharedsim"): 0,
    }
    for (a, b), cost in edges.items():
        reg.register_converter(copy_converter(key(a), key(b), cost))

    before = reg.compute_package(key("cpu"), key("clsim"))
    assert (before.total_cost, len(before)) == best_path(edges, "cpu", "clsim")[:2]

    edges[("glsim", "sharedsim")] = 1
    edges[("sharedsim", "glsim")] = 1
    reg.register_converter(copy_converter(key("glsim"), key("sharedsim"), 1))
    reg.register_converter(copy_converter(key("sharedsim"), key("glsim"), 1))

    after = reg.compute_package(key("glsim"), key("clsim"))
    oracle = best_path(edges, "glsim", "clsim")
    assert after.total_cost == oracle[0] == 1
    assert after.platforms == oracle[2] == ("glsim", "sharedsim", "clsim")


# --- packages ---------------------------------------------------------------------


def test_identity_package_is_empty(example_graph):
    package = example_graph.compute_package(key("cpu"), key("cpu"))
    assert package.total_cost == 0
    assert len(package) == 0


def test_shortcut_beats_direct_detour(example_graph):
    package = example_graph.compute_package(key("glsim"), key("clsim"))
    assert package.total_cost == 1
    assert package.platforms == ("glsim", "sharedsim", "clsim")


def test_unreachable_destination_raises(example_graph):
    example_graph.register_platform("vulkansim")
    with pytest.raises(NoConversionPath):
        example_graph.compute_package(key("cpu"), key("vulkansim"))


def test_kind_mismatch_package(example_graph):
    with pytest.raises(KindMismatch):
        example_graph.compute_package(RepKey("cpu", B), RepKey("glsim", T2))


def test_packages_cached_until_converter_registration(example_graph):
    first = example_graph.compute_package(key("cpu"), key("clsim"))
    again = example_graph.compute_package(key("cpu"), key("clsim"))
    assert again is first  # served from the cache
    example_graph.register_converter(copy_converter(key("cpu"), key("clsim"), 1))
    recomputed = example_graph.compute_package(key("cpu"), key("clsim"))
    assert recomputed is not first
    assert recomputed.total_cost == 1


@pytest.mark.parametrize("seed", range(12))
def test_random_graphs_match_bruteforce(seed):
    rng = random.Random(seed)
    n_platforms = rng.randint(2, 6)
    platforms = [f"p{i}" for i in range(n_platforms)]
    reg = PlatformRegistry()
    for p in platforms:
        reg.register_platform(p)
    pairs = [(a, b) for a in platforms for b in platforms if a != b]
    rng.shuffle(pairs)
    edges = {}
    for a, b in pairs[: rng.randint(1, 12)]:
        edges[(a, b)] = rng.randint(0, 10)
        reg.register_converter(copy_converter(key(a), key(b), edges[(a, b)]))
    for src in platforms:
        for dst in platforms:
            oracle = best_path(edges, src, dst)
            if oracle is None:
                with pytest.raises(NoConversionPath):
                    reg.compute_package(key(src), key(dst))
            else:
                package = reg.compute_package(key(src), key(dst))
                assert package.total_cost == oracle[0], (src, dst, edges)
                assert len(package) == oracle[1]
                assert package.platforms == (oracle[2] if oracle[1] else ())


# --- representation requests ----------------------------------------------------------


def test_home_platform_read_is_free():
    reg = buffer_graph()
    obj = make_object(reg)
    rep = obj.get_representation("cpu", AccessMode.READ)
    assert rep.valid
    assert obj.transfer_counter == 0


def test_second_read_is_a_cache_hit():
    reg = buffer_graph()
    obj = make_object(reg)
    obj.get_representation("glsim")
    assert obj.transfer_counter == 1
    obj.get_representation("glsim")
    assert obj.transfer_counter == 1


def test_refresh_uses_update_not_create():
    reg = buffer_graph()
    obj = make_object(reg)
    first = obj.get_representation("glsim")
    payload_id = id(first.payload)
    conv = reg.compute_package(RepKey("cpu", B), RepKey("glsim", B)).steps[0]
    assert (conv.create_count, conv.update_count) == (1, 0)

    obj.get_representation("cpu", AccessMode.WRITE)
    refreshed = obj.get_representation("glsim")
    assert (conv.create_count, conv.update_count) == (1, 1)
    assert id(refreshed.payload) == payload_id  # allocation reused
    assert obj.transfer_counter == 2


def test_write_leaves_exactly_one_valid():
    reg = buffer_graph()
    obj = make_object(reg)
    obj.get_representation("glsim")
    obj.get_representation("clsim")
    # intermediates refreshed along the package (sharedsim) are valid too
    assert {"cpu", "glsim", "clsim"} <= obj.valid_platforms
    obj.get_representation("glsim", AccessMode.WRITE)
    assert obj.valid_platforms == {"glsim"}


def test_write_on_missing_platform_refreshes_first():
    reg = buffer_graph()
    obj = make_object(reg)
    rep = obj.get_representation("glsim", AccessMode.WRITE)
    assert bytes(rep.payload) == bytes(range(16))  # refreshed from cpu before write access
    assert obj.valid_platforms == {"glsim"}


def test_convergence_after_write():
    reg = buffer_graph()
    obj = make_object(reg)
    rep = obj.get_representation("glsim", AccessMode.WRITE)
    rep.write_array(np.full((16, 1), 7, dtype=np.uint8))
    for platform in ("cpu", "clsim", "sharedsim"):
        values = obj.get_representation(platform).as_array()
        assert values.ravel().tolist() == [7] * 16, platform


def test_reads_pick_cheapest_valid_source():
    # After cpu and glsim are valid, clsim is served via the shared shortcut
    # (glsim->sharedsim->clsim, cost 1) rather than directly from cpu (cost 10).
    reg = buffer_graph()
    obj = make_object(reg)
    obj.get_representation("glsim")
    assert obj.transfer_counter == 1
    edges = {
        ("cpu", "glsim"): 10, ("glsim", "cpu"): 10,
        ("cpu", "clsim"): 10, ("clsim", "cpu"): 10,
        ("glsim", "sharedsim"): 1, ("sharedsim", "glsim"): 1,
        ("sharedsim", "clsim"): 0, ("clsim", "sharedsim"): 0,
    }
    source, label = best_from_sources(edges, ["cpu", "glsim"], "clsim")
    assert (source, label[0], label[1]) == ("glsim", 1, 2)
    obj.get_representation("clsim")
    assert obj.transfer_counter == 1 + label[1]


def test_no_valid_source():
    reg = buffer_graph()
    obj = make_object(reg)
    obj.representation("cpu").valid = False  # simulate corruption
    with pytest.raises(NoValidSource):
        obj.get_representation("glsim")


def test_unknown_platform_request():
    reg = buffer_graph()
    obj = make_object(reg)
    with pytest.raises(UnknownPlatform):
        obj.get_representation("vulkansim")


# --- shared platform constraint ----------------------------------------------------------


def shared_constrained_graph() -> tuple[PlatformRegistry, dict]:
    reg = PlatformRegistry()
    for p in ("cpu", "glsim", "clsim", "sharedsim"):
        reg.register_platform(p)
    reg.shared_platform_constraint("sharedsim", "glsim")
    edges = {
        ("cpu", "glsim"): 10, ("glsim", "cpu"): 10,
        ("cpu", "clsim"): 10, ("clsim", "cpu"): 10,
        ("glsim", "sharedsim"): 0, ("sharedsim", "glsim"): 0,
        ("sharedsim", "clsim"): 0,
    }
    for (a, b), cost in edges.items():
        reg.register_converter(copy_converter(key(a), key(b), cost))
    return reg, edges


def test_shared_constraint_rejects_foreign_converter():
    reg, _ = shared_constrained_graph()
    with pytest.raises(SharedHostViolation):
        reg.register_converter(copy_converter(key("cpu"), key("sharedsim"), 1))
    with pytest.raises(SharedHostViolation):
        reg.register_converter(copy_converter(key("clsim"), key("sharedsim"), 0))


def test_shared_packages_route_via_host():
    reg, edges = shared_constrained_graph()
    for src in ("cpu", "clsim", "glsim"):
        package = reg.compute_package(key(src), key("sharedsim"))
        oracle = best_path(edges, src, "sharedsim")
        assert package.total_cost == oracle[0]
        assert package.platforms == (oracle[2] if oracle[1] else ())
        if src != "sharedsim":
            assert package.platforms[-2] == "glsim"  # penultimate hop is the host


def test_shared_from_host_is_single_step():
    reg, _ = shared_constrained_graph()
    package = reg.compute_package(key("glsim"), key("sharedsim"))
    assert len(package) == 1 and package.total_cost == 0


def test_constraint_with_existing_violators_rejected():
    reg = PlatformRegistry()
    for p in ("cpu", "glsim", "sharedsim"):
        reg.register_platform(p)
    reg.register_converter(copy_converter(key("cpu"), key("sharedsim"), 1))
    with pytest.raises(SharedHostViolation):
        reg.shared_platform_constraint("sharedsim", "glsim")


# --- formats --------------------------------------------------------------------------


def test_format_predicate_rejects_unsupported():
    reg = PlatformRegistry()
    reg.register_platform("cpu")
    reg.register_platform("clsim")
    reg.register_converter(copy_converter(
        RepKey("cpu", B), RepKey("clsim", B), 10,
        format_predicate=lambda fmt: fmt.numeric_type is not NumericType.FLOAT64))
    ok = DataObject(reg, B, UINT8_1, (4,), bytes(4), "cpu")
    ok.get_representation("clsim")

    bad = DataObject(reg, B, DataFormat(NumericType.FLOAT64, 1), (4,), bytes(32), "cpu")
    with pytest.raises(UnsupportedFormat):
        bad.get_representation("clsim")
    assert bad.valid_platforms == {"cpu"}  # nothing partially converted


def test_bytes_per_element():
    assert UINT8_1.bytes_per_element == 1
    assert FLOAT32_1.bytes_per_element == 4
    assert DataFormat(NumericType.FLOAT64, 3).bytes_per_element == 24
    assert DataFormat(NumericType.INT32, 4).bytes_per_element == 16


def test_payload_size_validation():
    reg = buffer_graph()
    with pytest.raises(ValueError):
        DataObject(reg, B, UINT8_1, (16,), bytes(8), "cpu")


# --- determinism ------------------------------------------------------------------------


def test_identical_registries_identical_traces():
    def trace() -> list[int]:
        reg = buffer_graph()
        obj = make_object(reg)
        counts = []
        for platform, mode in [("glsim", AccessMode.READ), ("glsim", AccessMode.READ),
                               ("cpu", AccessMode.WRITE), ("glsim", AccessMode.READ),
                               ("clsim", AccessMode.READ), ("sharedsim", AccessMode.READ)]:
            obj.get_representation(platform, mode)
            counts.append(obj.transfer_counter)
        return counts

    assert trace() == trace()
