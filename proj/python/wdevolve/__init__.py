"""Warning-density repository mining.

Thin re-export of the compiled extension. The module works both as an
installed package (wheel layout puts _wdevolve inside the package) and from a
build tree where the extension sits directly on sys.path.
"""

try:
    from ._wdevolve import *  # noqa: F401,F403
    from ._wdevolve import __doc__  # noqa: F401
except ImportError:
    from _wdevolve import *  # noqa: F401,F403
    from _wdevolve import __doc__  # noqa: F401

__version__ = "0.1.0"
