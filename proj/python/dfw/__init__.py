"""Byteplot DBN malware scoring over a proof-of-work verdict chain.

Thin wrapper around the native module; see the project README for the
full pipeline (convert -> train -> classify -> simulate).
"""

from ._dfw import *  # noqa: F401,F403
from ._dfw import __doc__ as _native_doc  # noqa: F401
