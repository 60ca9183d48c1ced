"""Independent reference computations used by the tests.

Nothing here goes through the package's vectorization or eigendecomposition
helpers: matrices are multiplied directly and matrix powers come from scipy.
"""
import numpy as np
import scipy.linalg


def mpow(rho, s):
    return scipy.linalg.fractional_matrix_power(rho, s)


def lindblad_direct(H, jumps, rho):
    """``-i[H, rho] + sum_j W rho W* - 1/2 {W* W, rho}`` by plain products."""
    out = -1j * (H @ rho - rho @ H)
    for W in jumps:
        Wd = W.conj().T
        out = out + W @ rho @ Wd - 0.5 * (Wd @ W @ rho + rho @ Wd @ W)
    return out


def heisenberg_direct(H, jumps, A):
    """``i[H, A] + sum_j W* A W - 1/2 {W* W, A}``."""
    out = 1j * (H @ A - A @ H)
    for W in jumps:
        Wd = W.conj().T
        out = out + Wd @ A @ W - 0.5 * (Wd @ W @ A + A @ Wd @ W)
    return out


def superop_from_map(f, d):
    """Matrix of a linear map in the column-stacking convention built entry by entry."""
    M = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        for i in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = 1.0
            M[:, j * d + i] = f(E).T.reshape(-1)  # column stacking written as row-major of the transpose
    return M


def obs_inner(rho, A, B, r=0.0):
    return np.trace(A.conj().T @ mpow(rho, r) @ B @ mpow(rho, 1 - r))


def state_inner(rho, lam, mu, r=0.0):
    return np.trace(lam.conj().T @ mpow(rho, -r) @ mu @ mpow(rho, -1 + r))


def rand_c(d, rng):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def rand_density(d, rng):
    X = rand_c(d, rng)
    R = X @ X.conj().T
    return R / np.trace(R).real


def gibbs_direct(H, tau):
    E = scipy.linalg.expm(-np.asarray(H, dtype=complex) / tau)
    return E / np.trace(E).real
