"""Linear codes computed by shallow circuits of unbounded fan-in addition gates.

Finite fields, layered linear circuits, symmetric channels, typical sets,
dispersers, the range-detector gadgets behind bounded-depth good codes and a
codec that puts them together.
"""

from .errors import ShallowCodeError
from .galois import FieldSpec, make_field
from .circuit import LinearCircuit
from .channel import ChannelSpec, bsc, validate_symmetric
from .rng import Stream

__all__ = ["ShallowCodeError", "FieldSpec", "make_field", "LinearCircuit", "ChannelSpec", "bsc",
           "validate_symmetric", "Stream"]
__version__ = "0.1.0"
