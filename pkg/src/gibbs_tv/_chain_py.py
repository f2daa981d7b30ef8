"""Pure-Python twin of the compiled chain kernels.

Selected at import time when the extension is unavailable.  Consumes the same
pre-drawn site/uniform arrays in the same order, so trajectories match the
compiled kernel bit for bit.
"""

from __future__ import annotations

from math import exp

KERNEL_NAME = "python"


def run_hardcore(indptr, indices, p_plus, state, sites, us):
    """Advance a hardcore heat-bath chain; mutates ``state`` in place."""
    for t in range(len(sites)):
        v = sites[t]
        occupied = False
        for k in range(indptr[v], indptr[v + 1]):
            if state[indices[k]] == 1:
                occupied = True
                break
        if (not occupied) and us[t] < p_plus[v]:
            state[v] = 1
        else:
            state[v] = -1


def run_ising(indptr, indices, csr_j, h, state, sites, us):
    """Advance a soft-Ising heat-bath chain; mutates ``state`` in place."""
    for t in range(len(sites)):
        v = sites[t]
        c = h[v]
        for k in range(indptr[v], indptr[v + 1]):
            c += csr_j[k] * state[indices[k]]
        a = -2.0 * c
        if a > 709.0:
            p = 0.0
        elif a < -709.0:
            p = 1.0
        else:
            p = 1.0 / (1.0 + exp(a))
        state[v] = 1 if us[t] < p else -1
