"""FM envelope learning and tone transfer (bindings to the C++ core)."""

from ._fmtt import *  # noqa: F401,F403
from ._fmtt import FmttError, __doc__  # noqa: F401
