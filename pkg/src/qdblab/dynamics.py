"""Time evolution: exact exponentials, Lie-Trotter products, the dissipative split,
stochastic unravelling, Choi matrices and ergodic averages."""
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InternalError, InvalidParameterError, QdbViolationError, StabilityWarning
from .lindblad import as_jumps, dissipator_superops
from .operators import SuperOperator, as_hermitian, as_square, dagger, unvec, vec


def _generator(gens, side):
    if side == "state":
        return gens.L.matrix
    if side == "observable":
        return gens.Lp.matrix
    raise InvalidParameterError(f"side must be 'state' or 'observable', got {side!r}")


def _check_time(t, name="t"):
    if not t >= 0:
        raise InvalidParameterError(f"{name} must be nonnegative (the semigroup is one-sided), got {t}")


def propagator(gens, t, side="state"):
    """``expm(t L)`` (state side) or ``expm(t Lp)`` (observable side) as a matrix."""
    _check_time(t)
    return scipy.linalg.expm(t * _generator(gens, side))


def evolve_exact(gens, x0, t, side="state"):
    """Evolve a state or observable by the exact matrix exponential."""
    x0 = as_square(x0, "initial value")
    if t == 0:
        return x0.copy()
    return unvec(propagator(gens, t, side) @ vec(x0))


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    times: np.ndarray
    states: np.ndarray
    method: str


def evolve_series(gens, x0, times, side="state"):
    """Exact evolution sampled at increasing ``times``."""
    x0 = as_square(x0, "initial value")
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise InvalidParameterError("times must be nonnegative and nondecreasing")
    out = np.empty((times.size,) + x0.shape, dtype=complex)
    for k, t in enumerate(times):
        out[k] = evolve_exact(gens, x0, float(t), side)
    return EvolutionResult(times=times, states=out, method="exact")


def evolve_trotter(H, jumps, rho0, t, n, check_positivity=True):
    """Alternate the no-jump contraction and the exponentiated jump map ``n`` times.

    Each step applies ``exp(Phi t/n)`` and then ``rho -> B rho B*`` with
    ``B = expm((-iH - Y/2) t/n)``.  Both factors are completely positive.
    """
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"number of Trotter steps must be a positive integer, got {n}")
    _check_time(t)
    H = as_hermitian(H, "H")
    jumps = as_jumps(jumps, H.dim)
    rho = as_square(rho0, "rho0").copy()
    s = t / n
    B = scipy.linalg.expm((-1j * H.matrix - 0.5 * jumps.Y.matrix) * s)
    _, _, Phi, _ = dissipator_superops(jumps)
    E = scipy.linalg.expm(s * Phi.matrix)
    Bd = dagger(B)
    scale = max(abs(np.trace(rho)), 1.0)
    for _ in range(int(n)):
        rho = unvec(E @ vec(rho))
        rho = B @ rho @ Bd
        if check_positivity:
            low = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0]
            if low < -1e-9 * scale:
                raise InternalError(f"Trotter step lost positivity (min eigenvalue {low:.3e})")
    return rho


def split_propagator(gens, t):
    """``expm(L0p t) expm(Gp t)``."""
    _check_time(t)
    return scipy.linalg.expm(t * gens.L0p.matrix) @ scipy.linalg.expm(t * gens.Gp.matrix)


def split_discrepancy(gens, t):
    """Spectral norm of ``expm(Lp t) - expm(L0p t) expm(Gp t)``."""
    return float(np.linalg.norm(propagator(gens, t, "observable") - split_propagator(gens, t), 2))


def evolve_split(gens, A0, t, check=False):
    """Evolve an observable by the Hamiltonian flow after the dissipative flow.

    The product equals the full evolution when the two parts commute, which is
    the case under detailed balance.  With ``check`` a mismatch above 1e-6
    raises QdbViolationError.
    """
    A0 = as_square(A0, "A0")
    P = split_propagator(gens, t)
    out = unvec(P @ vec(A0))
    if check:
        gap = split_discrepancy(gens, t)
        if gap > 1e-6:
            raise QdbViolationError(f"split evolution differs from exact by {gap:.3e}")
    return out


@dataclass(frozen=True, eq=False)
class ChoiReport:
    matrix: np.ndarray
    min_eigenvalue: float
    is_cp: bool


def choi_matrix(S, tol=1e-9):
    """Choi matrix ``sum_ab E_ab (x) S(E_ab)`` and its complete-positivity verdict."""
    M = S.matrix if isinstance(S, SuperOperator) else np.asarray(S)
    d = int(round(np.sqrt(M.shape[0])))
    C = np.zeros((d * d, d * d), dtype=complex)
    for b in range(d):
        for a in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[a, b] = 1.0
            C += np.kron(E, unvec(M @ vec(E)))
    Ch = 0.5 * (C + dagger(C))
    low = float(np.linalg.eigvalsh(Ch)[0])
    norm = float(np.linalg.norm(Ch, 2))
    return ChoiReport(matrix=C, min_eigenvalue=low, is_cp=low >= -tol * norm)


def transpose_superop(d):
    """The transpose map, a positive but not completely positive control."""
    P = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            P[i * d + j, j * d + i] = 1.0
    return SuperOperator(P)


def spectral_projector_null(L, tol=1e-10):
    """Spectral projector onto the kernel of ``L`` along its range (zero eigenvalue assumed semisimple)."""
    n = L.shape[0]
    s_max = np.linalg.norm(L, 2)
    if s_max == 0:
        return np.eye(n, dtype=complex)
    _, s, Vh = np.linalg.svd(L)
    right = Vh[s <= tol * s_max].conj().T
    _, s2, Vh2 = np.linalg.svd(dagger(L))
    left = Vh2[s2 <= tol * s_max].conj().T
    if right.shape[1] == 0:
        return np.zeros((n, n), dtype=complex)
    if left.shape[1] != right.shape[1]:
        raise InternalError("left and right kernels of the generator differ in dimension")
    return right @ np.linalg.solve(dagger(left) @ right, dagger(left))


def ergodic_average(gens, x0, T, side="state", method="closed", quad_points=64):
    """Time average ``(1/T) int_0^T exp(tL) x0 dt``.

    ``method="closed"`` splits ``x0`` into its kernel component, which is
    constant, and the rest, on which the integral is
    ``(exp(TL) - 1) L^D x0 / T`` with ``L^D = (L + P)^-1 - P``.
    ``method="quadrature"`` uses Gauss-Legendre nodes on [0, T].
    """
    if not T > 0:
        raise InvalidParameterError(f"averaging time T must be positive, got {T}")
    x0 = as_square(x0, "initial value")
    L = _generator(gens, side)
    v = vec(x0)
    if method == "closed":
        P = spectral_projector_null(L)
        null_part = P @ v
        drazin = np.linalg.solve(L + P, v - null_part)
        avg = null_part + (scipy.linalg.expm(T * L) @ drazin - drazin) / T
    elif method == "quadrature":
        if quad_points < 1:
            raise InvalidParameterError("quad_points must be positive")
        nodes, weights = np.polynomial.legendre.leggauss(int(quad_points))
        ts = 0.5 * T * (nodes + 1.0)
        avg = sum(0.5 * w * (scipy.linalg.expm(t * L) @ v) for t, w in zip(ts, weights))
    else:
        raise InvalidParameterError(f"unknown method {method!r}")
    return unvec(avg)


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Monte Carlo estimate of ``E <psi(t), A psi(t)>`` over stochastic paths."""

    paths: int
    dt: float
    seed: int
    t: float
    steps: int
    mean: complex
    stderr: float
    values: np.ndarray = None


def _apply_rows(M, psi):
    """``psi @ M.T`` row by row with a fixed elementwise summation order."""
    out = psi[:, 0:1] * M[:, 0]
    for k in range(1, M.shape[1]):
        out = out + psi[:, k:k + 1] * M[:, k]
    return out


def _path_noise(seed, path, steps, m, dt):
    """Wiener increments for one path from its own counter-based stream."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(path,))
    rng = np.random.Generator(np.random.Philox(ss))
    return rng.standard_normal((steps, m)) * np.sqrt(dt)


def _run_block(K, jumps, psi0, A, seed, first, count, steps, dt):
    d = psi0.size
    m = len(jumps)
    noise = np.empty((steps, count, m))
    for i in range(count):
        noise[:, i, :] = _path_noise(seed, first + i, steps, m, dt) if m else 0.0
    psi = np.broadcast_to(psi0, (count, d)).copy()
    Kdt = K * dt
    for n in range(steps):
        incr = _apply_rows(Kdt, psi)
        for j, W in enumerate(jumps):
            incr = incr + _apply_rows(W, psi) * noise[n, :, j:j + 1]
        psi = psi + incr
    Apsi = _apply_rows(A, psi)
    return np.sum(psi.conj() * Apsi, axis=1)


def unravel(H, jumps, psi0, t, dt, N, seed, A, block=1000, workers=1):
    """Euler-Maruyama integration of the linear stochastic Schroedinger equation.

    ``d psi = (-iH - Y/2) psi dt + sum_j W_j psi dw_j`` with independent real
    Wiener processes ``w_j``.  Path ``k`` draws its increments from a Philox
    stream keyed by ``(seed, k)``, so the estimate does not depend on ``block``
    or ``workers``.

    :return: TrajectoryEnsemble with the mean and standard error of
        ``<psi(t), A psi(t)>``
    """
    H = as_hermitian(H, "H")
    jumps = as_jumps(jumps, H.dim)
    psi0 = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi0.size != H.dim:
        raise InvalidParameterError(f"psi0 has length {psi0.size}, expected {H.dim}")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise InvalidParameterError("psi0 must be a unit vector")
    if not dt > 0 or dt > t:
        raise InvalidParameterError(f"need 0 < dt <= t, got dt={dt}, t={t}")
    if int(N) != N or N < 1:
        raise InvalidParameterError(f"number of paths must be a positive integer, got {N}")
    A = as_square(A, "A")
    ynorm = float(np.abs(jumps.Y.eigenvalues).max(initial=0.0))
    if dt * ynorm > 0.1:
        warnings.warn(f"dt*||Y|| = {dt * ynorm:.3g} exceeds 0.1; Euler-Maruyama may be inaccurate",
                      StabilityWarning, stacklevel=2)
    steps = int(round(t / dt))
    K = -1j * H.matrix - 0.5 * jumps.Y.matrix
    starts = list(range(0, int(N), int(block)))
    tasks = [(s, min(block, N - s)) for s in starts]

    def work(task):
        return _run_block(K, jumps.jumps, psi0, A, int(seed), task[0], task[1], steps, dt)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(work, tasks))
    else:
        parts = [work(task) for task in tasks]
    values = np.concatenate(parts)
    hermitian = np.allclose(A, dagger(A), rtol=0, atol=1e-14)
    if hermitian:
        values = values.real
    mean = np.sum(values) / N
    if N > 1:
        dev = values - mean
        var = np.sum((dev * np.conj(dev)).real) / (N - 1)
        stderr = float(np.sqrt(var / N))
    else:
        stderr = float("nan")
    return TrajectoryEnsemble(paths=int(N), dt=float(dt), seed=int(seed), t=float(t), steps=steps,
                              mean=mean, stderr=stderr, values=values)
