"""Kernel backend selection: compiled extension when available, pure
Python otherwise.  DIALOGLAB_PURE=1 forces the fallback (used by the
benchmark and the backend-equivalence tests)."""

import os

from . import _kernels_py

if os.environ.get("DIALOGLAB_PURE") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
q_values = _impl.q_values
greedy_index = _impl.greedy_index
td_update = _impl.td_update
softmax_probs = _impl.softmax_probs
policy_grad_accumulate = _impl.policy_grad_accumulate
