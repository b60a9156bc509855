"""Independent reference computations used to cross-check the library.

Nothing here calls into the code paths it checks: the bounded transform
goes through a Hermitian eigendecomposition instead of an SVD, kernels are
counted with ``null_space`` instead of gap splitting, and the pasting
unitary is rebuilt from explicit index bookkeeping.
"""

import numpy as np
import scipy.linalg as sla


def bounded_transform_eigh(D):
    w, V = sla.eigh(D)
    return (V * (w / np.sqrt(1.0 + w**2))) @ V.conj().T


def kernel_dims(D, grading, rtol=1e-6):
    """``dim ker`` of ``D`` on each chirality via ``null_space``."""
    plus, minus = grading > 0, grading < 0
    Dp = D[np.ix_(minus, plus)]
    k_plus = sla.null_space(Dp, rcond=rtol).shape[1]
    k_minus = sla.null_space(Dp.conj().T, rcond=rtol).shape[1]
    return k_plus, k_minus


def superdimension(grading):
    return int(np.sum(grading > 0) - np.sum(grading < 0))


def swap_permutation(dims, dims_t, negate_moved_ht2=True):
    """Rebuild the pasting unitary from slot offsets, row by row."""
    n1, n0, n2 = dims
    m1, _, m2 = dims_t
    src = {"H1": (0, n1), "H0": (n1, n0), "H2": (n1 + n0, n2),
           "Ht1": (n1 + n0 + n2, m1), "Ht0": (n1 + n0 + n2 + m1, n0),
           "Ht2": (n1 + 2 * n0 + n2 + m1, m2)}
    order = ["H1", "H0", "Ht2", "Ht1", "Ht0", "H2"]
    sign = {"Ht2": -1.0} if negate_moved_ht2 else {"H2": -1.0}
    n = sum(v[1] for v in src.values())
    U = np.zeros((n, n))
    r = 0
    for name in order:
        start, size = src[name]
        U[r:r + size, start:start + size] = sign.get(name, 1.0) * np.eye(size)
        r += size
    return U


def heat_supertrace(D, grading, t):
    """``Tr(gamma exp(-t D^2))`` through ``expm`` of each chiral block."""
    plus, minus = grading > 0, grading < 0
    D2 = D @ D
    tp = np.trace(sla.expm(-t * D2[np.ix_(plus, plus)])).real
    tm = np.trace(sla.expm(-t * D2[np.ix_(minus, minus)])).real
    return tp - tm
