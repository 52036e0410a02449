"""Label-free point-cloud instance segmentation.

Thin bindings over the C++ core: plane removal, farthest point sampling,
affinity graphs, multicut partitioning, label upsampling, mask losses and
class-agnostic AP.
"""

from ._core import *  # noqa: F401,F403
from ._core import (
    ArgumentError,
    ConfigError,
    DataError,
    DefinednessError,
    Error,
    FormatError,
    IoError,
    SizeError,
)

__version__ = "0.1.0"
