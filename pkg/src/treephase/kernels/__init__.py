"""Backend selection for the sampling kernels.

The compiled extension is preferred when importable; the numpy fallback is
bit-compatible up to floating-point summation order.  Set the environment
variable ``TREEPHASE_BACKEND`` to ``numpy`` or ``cython`` to force one.
"""

import os

from . import _pykern

_requested = os.environ.get("TREEPHASE_BACKEND", "").strip().lower()

if _requested == "numpy":
    _impl = _pykern
elif _requested == "cython":
    from . import _ckern as _impl
else:
    try:
        from . import _ckern as _impl
    except ImportError:
        _impl = _pykern

BACKEND = _impl.BACKEND

derive_seeds = _impl.derive_seeds
derive_seed = _impl.derive_seed
uniform_grid = _impl.uniform_grid
pair_uniforms = _impl.pair_uniforms
symbol_grid = _impl.symbol_grid
pair_symbols = _impl.pair_symbols
tree_level_sums = _impl.tree_level_sums
