"""Backend selection for the enumeration kernel.

The compiled Cython core is used when it was built; otherwise the
pure-Python implementation is loaded. Set ``GRIDCONF_PURE_PYTHON=1`` to
force the fallback.
"""

import os

from . import _core_py

if os.environ.get("GRIDCONF_PURE_PYTHON"):
    _compiled = None
else:
    try:
        from . import _core as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
evaluate_range = (_compiled or _core_py).evaluate_range
evaluate_range_py = _core_py.evaluate_range
evaluate_range_compiled = _compiled.evaluate_range if _compiled is not None else None
unrank_combination = _core_py.unrank_combination
