"""Numerical kernels with a fixed, row-independent reduction order.

Both helpers loop over the (short) coordinate axis and vectorise over
rows.  Every output entry is therefore computed by the same sequence of
floating-point operations regardless of where its row sits in the input,
which is what makes relabelled inputs produce bit-identical results.
"""

import numpy as np


def pairwise_sq_dists(A, B):
    """Squared Euclidean distances between the rows of ``A`` and ``B``."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    out = np.zeros((A.shape[0], B.shape[0]))
    for k in range(A.shape[1]):
        diff = A[:, k, None] - B[None, :, k]
        out += diff * diff
    return out


def project(A, directions):
    """Return ``A @ directions.T`` accumulated coordinate by coordinate."""
    A = np.asarray(A, dtype=np.float64)
    directions = np.asarray(directions, dtype=np.float64)
    out = np.zeros((A.shape[0], directions.shape[0]))
    for k in range(A.shape[1]):
        out += A[:, k, None] * directions[None, :, k]
    return out
