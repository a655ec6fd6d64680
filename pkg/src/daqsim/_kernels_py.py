"""NumPy implementations of the compiled kernels (same signatures, same results)."""
import numpy as np


def _as_complex(st):
    return st.view(np.complex128)


def apply_1q(st, qubit, u):
    a = _as_complex(st)
    b, n = a.shape
    s = 1 << qubit
    v = a.reshape(b, n // (2 * s), 2, s)
    m = np.asarray(u).view(np.complex128).reshape(2, 2)
    x0 = v[:, :, 0, :].copy()
    x1 = v[:, :, 1, :]
    v[:, :, 0, :] = m[0, 0] * x0 + m[0, 1] * x1
    v[:, :, 1, :] = m[1, 0] * x0 + m[1, 1] * x1


def apply_layer(st, qubits, us):
    for q, u in zip(qubits, us):
        apply_1q(st, int(q), u)


def apply_cnot(st, control, target):
    a = _as_complex(st)
    n = a.shape[1]
    k = np.arange(n)
    src = k[((k >> control) & 1 == 1) & ((k >> target) & 1 == 0)]
    dst = src | (1 << target)
    a[:, src], a[:, dst] = a[:, dst], a[:, src].copy()


def group_probs(st, rows, idx, n_groups):
    a = _as_complex(st)[np.asarray(rows)]
    p = a.real ** 2 + a.imag ** 2
    out = np.zeros((len(rows), n_groups))
    for r in range(len(rows)):
        out[r] = np.bincount(idx, weights=p[r], minlength=n_groups)
    return out


def scale_gather(st, rows, idx, table):
    a = _as_complex(st)
    t = np.asarray(table).view(np.complex128)
    rows = np.asarray(rows)
    a[rows] *= t[:, idx]


def jump_row(st, row, idx, gamma_g, gamma_q, u1, u2, total):
    a = _as_complex(st)[row]
    w = (a.real ** 2 + a.imag ** 2) * np.asarray(gamma_g)[idx]
    cdf = np.cumsum(w)
    k = int(np.searchsorted(cdf, u1 * total, side="right"))
    if k >= len(w):
        k = int(np.flatnonzero(w > 0)[-1])
    excited = [i for i in range(len(gamma_q)) if (k >> i) & 1]
    gq = np.cumsum([gamma_q[i] for i in excited])
    i = excited[min(int(np.searchsorted(gq, u2 * gq[-1], side="right")), len(excited) - 1)]
    v = a.reshape(-1, 2, 1 << i)
    v[:, 0, :] = v[:, 1, :]
    v[:, 1, :] = 0
    a *= 1.0 / np.sqrt(np.sum(a.real ** 2 + a.imag ** 2))
    return i
