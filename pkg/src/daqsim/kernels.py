"""Kernel selection: the compiled extension when importable, NumPy otherwise.

Set ``DAQSIM_PURE_PYTHON=1`` to force the NumPy fallback.
"""
import os

import numpy as np

from . import _kernels_py

if os.environ.get("DAQSIM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"


def use(name):
    """Switch the active kernel set (``"compiled"`` or ``"python"``)."""
    global _impl, BACKEND
    if name == "python":
        _impl = _kernels_py
    elif name == "compiled":
        from . import _kernels
        _impl = _kernels
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    BACKEND = name


def compiled_available():
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True


def _real(states):
    if states.dtype != np.complex128 or not states.flags.c_contiguous or states.ndim != 2:
        raise ValueError("kernels need a C-contiguous complex128 array of shape (batch, 2**n)")
    return states.view(np.float64)


def _u8(u):
    return np.ascontiguousarray(u, dtype=np.complex128).reshape(-1).view(np.float64)


def apply_1q(states, qubit, u):
    _impl.apply_1q(_real(states), int(qubit), _u8(u))


def apply_layer(states, qubits, us):
    if len(qubits) == 0:
        return
    us = np.ascontiguousarray(np.asarray(us, dtype=np.complex128).reshape(len(qubits), 4))
    _impl.apply_layer(_real(states), np.asarray(qubits, dtype=np.int64), us.view(np.float64))


def apply_cnot(states, control, target):
    _impl.apply_cnot(_real(states), int(control), int(target))


def group_probs(states, rows, idx, n_groups):
    return _impl.group_probs(_real(states), np.asarray(rows, dtype=np.int64),
                             idx, int(n_groups))


def scale_gather(states, rows, idx, table):
    table = np.ascontiguousarray(table, dtype=np.complex128)
    _impl.scale_gather(_real(states), np.asarray(rows, dtype=np.int64), idx,
                       table.view(np.float64))


def jump_row(states, row, idx, gamma_g, gamma_q, u1, u2, total):
    return _impl.jump_row(_real(states), int(row), idx,
                          np.ascontiguousarray(gamma_g, dtype=np.float64),
                          np.ascontiguousarray(gamma_q, dtype=np.float64), float(u1), float(u2), float(total))
