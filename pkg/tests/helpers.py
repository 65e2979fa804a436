"""Tiny test-only processors passing plain integers around (tag "number")."""

from __future__ import annotations

from pipevis.modules import ModuleDescriptor, ModuleRegistry, PlatformDecl
from pipevis.network import Processor, Property


class NumberSource(Processor):
    CLASS_ID = "NumberSource"
    HELP = "Emits the `value` property."

    def __init__(self):
        super().__init__()
        self.add_outport("out", "number")
        self.add_property(Property("value", "int", 1))

    def process(self):
        self.outports["out"].data = self.value("value")


class AddOne(Processor):
    CLASS_ID = "AddOne"
    HELP = "Adds one to the incoming number."

    def __init__(self):
        super().__init__()
        self.add_inport("in", "number")
        self.add_outport("out", "number")

    def process(self):
        self.outports["out"].data = self.inports["in"].data + 1


class Add(Processor):
    CLASS_ID = "Add"
    HELP = "Adds two numbers; the second input is optional and defaults to 0."

    def __init__(self):
        super().__init__()
        self.add_inport("a", "number")
        self.add_inport("b", "number", optional=True)
        self.add_outport("out", "number")

    def process(self):
        b = self.inports["b"].data
        self.outports["out"].data = self.inports["a"].data + (b if b is not None else 0)


class NumberSink(Processor):
    CLASS_ID = "NumberSink"
    HELP = "Stores the incoming number."

    def __init__(self):
        super().__init__()
        self.add_inport("in", "number")
        self.received = None

    def process(self):
        self.received = self.inports["in"].data


class Failing(Processor):
    CLASS_ID = "Failing"
    HELP = "Raises during process (failure-path testing)."

    def __init__(self):
        super().__init__()
        self.add_inport("in", "number", optional=True)
        self.add_outport("out", "number")

    def process(self):
        raise RuntimeError("intentional failure")


class ManyInports(Processor):
    CLASS_ID = "ManyInports"
    HELP = "Five optional inports (lint fixture)."

    def __init__(self):
        super().__init__()
        for i in range(5):
            self.add_inport(f"in{i}", "number", optional=True)
        self.add_outport("out", "number")

    def process(self):
        self.outports["out"].data = 0


class FourInports(Processor):
    CLASS_ID = "FourInports"
    HELP = "Four optional inports (lint fixture)."

    def __init__(self):
        super().__init__()
        for i in range(4):
            self.add_inport(f"in{i}", "number", optional=True)
        self.add_outport("out", "number")

    def process(self):
        self.outports["out"].data = 0


TEST_PROCESSORS = [NumberSource, AddOne, Add, NumberSink, Failing, ManyInports, FourInports]


def make_module(version=(1, 0), processors=None, name="testmod") -> ModuleDescriptor:
    return ModuleDescriptor(name=name, version=version,
                            processors=list(processors or TEST_PROCESSORS))


def make_test_registry() -> ModuleRegistry:
    registry = ModuleRegistry()
    registry.load_module(ModuleDescriptor(name="cpu", platforms=[PlatformDecl("cpu")]))
    registry.load_module(make_module())
    return registry


def random_network(registry: ModuleRegistry, rng, max_processors: int = 20):
    """Random valid acyclic number-pipeline over the test processors."""
    from pipevis.network import ProcessorNetwork

    net = ProcessorNetwork(registry=registry)
    count = rng.randint(1, max_processors)
    class_ids = ["NumberSource", "AddOne", "Add", "NumberSink"]
    ids = []
    for i in range(count):
        class_id = rng.choice(class_ids)
        identifier = f"{class_id.lower()}{i}"
        proc = net.add_processor(class_id, identifier)
        proc.editor_position = (rng.randint(-500, 500), rng.randint(-500, 500))
        if rng.random() < 0.3:
            proc.display_name = f"node {i}"
        ids.append(identifier)

    # connect earlier -> later only, so the graph stays acyclic by construction
    for i, identifier in enumerate(ids):
        proc = net.processors[identifier]
        for inport in proc.inports.values():
            if i == 0 or rng.random() < 0.35:
                continue
            supplier_id = ids[rng.randrange(i)]
            supplier = net.processors[supplier_id]
            if not supplier.outports:
                continue
            outport = rng.choice(sorted(supplier.outports))
            net.add_connection(supplier_id, outport, identifier, inport.id)

    int_props = [f"{pid}.value" for pid in ids if "value" in net.processors[pid].properties]
    for path in int_props:
        if rng.random() < 0.6:
            net.set_property(path, rng.randint(-50, 50))
    for _ in range(min(3, len(int_props))):
        if len(int_props) >= 2 and rng.random() < 0.5:
            src, dst = rng.sample(int_props, 2)
            net.add_link(src, dst, bidirectional=rng.random() < 0.5)
    for path in int_props:
        if rng.random() < 0.2:
            net.app_exposed.add(path)
    return net
