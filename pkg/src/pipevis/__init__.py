"""pipevis: a dataflow visualization-pipeline engine.

Algorithms written against different (simulated) computing platforms
interoperate through a representation/converter data layer; pipelines are
acyclic processor networks with visual debugging, co-located documentation,
hot module reload, and image regression testing on top.
"""

from .datacore import (
    AccessMode,
    Converter,
    ConverterPackage,
    DataFormat,
    DataObject,
    NumericType,
    PlatformRegistry,
    RepKey,
    Representation,
    RepresentationKind,
    alias_converter,
    copy_converter,
)
from .datatypes import (
    BufferData,
    ImageData,
    MeshData,
    VolumeData,
    element_at,
    load_raw_volume,
    make_image,
    make_volume,
)
from .builtins import default_module_registry
from .engine import Engine
from .modules import ModuleDescriptor, ModuleRegistry, PlatformDecl
from .network import (
    CompositeProcessor,
    InvalidationLevel,
    Processor,
    ProcessorNetwork,
    Property,
    expand_composite,
    make_composite,
)
from .workspace import deserialize, digest, load_workspace, save_workspace, serialize

__version__ = "0.1.0"

__all__ = [
    "AccessMode",
    "BufferData",
    "CompositeProcessor",
    "Converter",
    "ConverterPackage",
    "DataFormat",
    "DataObject",
    "Engine",
    "ImageData",
    "InvalidationLevel",
    "MeshData",
    "ModuleDescriptor",
    "ModuleRegistry",
    "NumericType",
    "PlatformDecl",
    "PlatformRegistry",
    "Processor",
    "ProcessorNetwork",
    "Property",
    "RepKey",
    "Representation",
    "RepresentationKind",
    "VolumeData",
    "alias_converter",
    "copy_converter",
    "default_module_registry",
    "deserialize",
    "digest",
    "element_at",
    "expand_composite",
    "load_raw_volume",
    "load_workspace",
    "make_composite",
    "make_image",
    "make_volume",
    "save_workspace",
    "serialize",
    "__version__",
]
