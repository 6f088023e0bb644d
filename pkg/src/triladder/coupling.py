"""Residual couplings generated by rotating the oscillator into the adiabatic frame.

Differentiating the y-dependent eigenbasis B(y) gives the matrix
G(y) = B^T (dB/dy), antisymmetric for a real orthogonal basis.  Its three
independent entries F12, F13, F23 drive the residual operators of the rotated
problem: a derivative-coupling operator (anticommutator of d/dy with each
F_jk) that connects different levels, and a small diagonal remainder built
from the squares of the F functions.

Matrix elements between product states (level j, oscillator quantum n) are
evaluated two independent ways: a Gauss-Hermite product quadrature usable up
to moderate quantum numbers, and a windowed Fock-operator construction with
no practical limit on n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError, StepCancellationError
from .oscillator import (derivative_from_rows, derivative_matrix,
                         eigenfunction_rows, position_offdiagonal,
                         roots_hermite)
from .trilevel import ModelParams, _chained_bases, _eigensystem

#: default finite-difference step rule for differentiating the eigenbasis;
#: smaller steps leave the Richardson-extrapolated values noisier than the
#: 1e-8 refinement stability demanded of the matrix elements
def default_step(y):
    return 1e-3 * np.maximum(1.0, np.abs(y))


#: quantum number cap for the Gauss-Hermite route
HERMITE_MAX_N = 5000

METHOD_HERMITE = "hermite-quadrature"
METHOD_FOCK = "fock-window"

_REL_TOL = 1e-8
_ABS_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class CouplingSample:
    """The three coupling-function values at one coordinate.

    ``step`` is the finite-difference step actually used and ``error`` the
    Richardson estimate of the truncation error (max over the three entries).
    """

    y: float
    f12: float
    f13: float
    f23: float
    step: float
    error: float


@dataclass(frozen=True)
class MatrixElementRequest:
    """One off-diagonal matrix element <j,n| . |k,m> of the derivative coupling."""

    j: int
    k: int
    n: int
    m: int
    method: str

    def __post_init__(self):
        if self.j not in (1, 2, 3) or self.k not in (1, 2, 3) or self.j == self.k:
            raise ValueError(f"levels must be distinct members of 1..3, got ({self.j}, {self.k})")
        if self.n < 0 or self.m < 0:
            raise ValueError("oscillator quantum numbers must be >= 0")
        if self.method not in (METHOD_HERMITE, METHOD_FOCK):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == METHOD_HERMITE and max(self.n, self.m) > HERMITE_MAX_N:
            raise ValueError(
                f"{METHOD_HERMITE} supports n, m <= {HERMITE_MAX_N}; use {METHOD_FOCK}")


def _coupling_batch(params, y, richardson=True):
    """G(y) = B^T dB/dy on an ascending coordinate grid.

    Central differences of the sign-chained eigenbasis, Richardson
    extrapolated from steps h and h/2.  Returns (G, err, h) with
    G of shape (N, 3, 3) and err the per-point max-entry Richardson estimate.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    h = default_step(y)
    _, base = _chained_bases(params, y)

    def central(step):
        _, plus = _eigensystem(params, y + step, reference=base)
        _, minus = _eigensystem(params, y - step, reference=base)
        return np.einsum("nij,nik->njk", base, plus - minus) / (2.0 * step)[:, None, None]

    g_h = central(h)
    if not richardson:
        return g_h, np.full(y.shape, np.nan), h
    g_half = central(0.5 * h)
    g = (4.0 * g_half - g_h) / 3.0
    err = np.max(np.abs(g_half - g_h), axis=(-2, -1)) / 3.0
    return g, err, h


def coupling_matrix(params: ModelParams, y: float, step: float = None):
    """Full 3x3 derivative-coupling matrix at one coordinate.

    All nine products are formed, so the caller can check how antisymmetric
    the result actually is.  Returns ``(matrix, error_estimate)``.
    """
    y = float(y)
    if step is None:
        g, err, _ = _coupling_batch(params, [y])
        return g[0], float(err[0])
    _, base = _eigensystem(params, [y])
    _, plus = _eigensystem(params, [y + step], reference=base)
    _, minus = _eigensystem(params, [y - step], reference=base)
    g_h = np.einsum("nij,nik->njk", base, plus - minus)[0] / (2.0 * step)
    _, plus = _eigensystem(params, [y + 0.5 * step], reference=base)
    _, minus = _eigensystem(params, [y - 0.5 * step], reference=base)
    g_half = np.einsum("nij,nik->njk", base, plus - minus)[0] / step
    g = (4.0 * g_half - g_h) / 3.0
    return g, float(np.max(np.abs(g_half - g_h)) / 3.0)


def coupling_functions(params: ModelParams, y: float, step: float = None) -> CouplingSample:
    """F12, F13, F23 at one coordinate by differentiating the eigenbasis.

    Raises StepCancellationError when the Richardson error estimate exceeds
    the magnitude of the result, which is the signature of a step small
    enough that roundoff noise dominates the difference quotient.
    """
    used = float(default_step(y)) if step is None else float(step)
    g, err = coupling_matrix(params, y, step=None if step is None else used)
    anti = 0.5 * (g - g.T)
    size = np.max(np.abs(anti))
    # the difference quotient cannot beat basis roundoff over the step
    roundoff = 8e-16 / used
    if max(err, 0.0) > max(size, _ABS_FLOOR) or (size > 0 and roundoff > size):
        raise StepCancellationError(
            f"derivative noise ({err:.3e} estimated, {roundoff:.3e} roundoff floor) "
            f"dominates coupling magnitude {size:.3e} at y={y} (step {used:.3e})")
    return CouplingSample(float(y), float(g[0, 1]), float(g[0, 2]), float(g[1, 2]),
                          used, float(err))


def _coupling_values(params, pair, y_sorted):
    """F for one level pair on an ascending grid, Richardson extrapolated."""
    g, _, _ = _coupling_batch(params, y_sorted)
    a, b = pair[0] - 1, pair[1] - 1
    return g[:, a, b]


def _coupling_squares(params, y_sorted):
    """(F12^2, F13^2, F23^2) on an ascending grid."""
    g, _, _ = _coupling_batch(params, y_sorted)
    return g[:, 0, 1] ** 2, g[:, 0, 2] ** 2, g[:, 1, 2] ** 2


def _converged(new, old, scale):
    delta = abs(new - old)
    return delta <= _REL_TOL * abs(new) or delta <= _ABS_FLOOR * scale


#: coupling functions are only evaluated this far beyond the classical turning
#: point; eigenfunction products there are already below double precision
_TURNING_MARGIN = 12.0


def _classical_mask(y, nmax):
    return np.abs(y) <= np.sqrt(2.0 * nmax + 1.0) + _TURNING_MARGIN


def _element_hermite(params, pair, n, m, order):
    """Quadrature value of integral F * (phi_n phi_m' - phi_n' phi_m) dy.

    The integrand is the integrated-by-parts form of the derivative-coupling
    kernel; boundary terms vanish for bound states.  Also returns the
    magnitude sum used as a noise floor for parity-forbidden elements.
    """
    y = roots_hermite(order)[0]
    need = sorted({order - 1, n, m, abs(n - 1), n + 1, abs(m - 1), m + 1})
    rows = eigenfunction_rows(y, need)
    row = {k: rows[i] for i, k in enumerate(need)}
    w = 1.0 / (order * row[order - 1] ** 2)
    pn, pm = row[n], row[m]
    dn = derivative_from_rows(n, row[abs(n - 1)], row[n + 1])
    dm = derivative_from_rows(m, row[abs(m - 1)], row[m + 1])
    inside = _classical_mask(y, max(n, m))
    f = np.zeros(y.size)
    f[inside] = _coupling_values(params, pair, y[inside])
    terms = w * f * (pn * dm - dn * pm)
    return float(np.sum(terms)), float(np.sum(np.abs(terms)))


def _window_operators(params, pair, lo, hi):
    """Windowed F(y) and d/dy matrices on Fock states lo..hi."""
    dim = hi - lo + 1
    yvals, q = eigh_tridiagonal(np.zeros(dim), position_offdiagonal(lo, hi))
    f = _coupling_values(params, pair, yvals)
    fmat = (q * f) @ q.T
    return fmat, derivative_matrix(lo, hi)


def _element_fock(params, pair, n, m, pad):
    lo = max(min(n, m) - pad, 0)
    hi = max(n, m) + pad
    fmat, dmat = _window_operators(params, pair, lo, hi)
    op = dmat @ fmat + fmat @ dmat
    scale = (np.abs(dmat) @ np.abs(fmat) + np.abs(fmat) @ np.abs(dmat))[n - lo, m - lo]
    return float(op[n - lo, m - lo]), float(scale)


def v_matrix_element(params: ModelParams, req: MatrixElementRequest) -> float:
    """<level j, n| derivative-coupling operator |level k, m>, in oscillator quanta.

    The operator for an ordered pair j < k is -(1/2) {d/dy, F_jk(y)}; for
    j > k the sign flips, which together with the antisymmetry of the kernel
    in (n, m) makes the full operator symmetric.  Both evaluation methods
    refine themselves (node doubling, window-padding doubling) until the
    result is stable to 1e-8 relative, and raise ConvergenceError otherwise.
    """
    sigma = 1.0 if req.j < req.k else -1.0
    pair = (min(req.j, req.k), max(req.j, req.k))
    if req.method == METHOD_HERMITE:
        size = 2 * max(req.n, req.m) + 64
        evaluate = lambda s: _element_hermite(params, pair, req.n, req.m, s)
    else:
        size = 4 * abs(req.n - req.m) + 64
        evaluate = lambda s: _element_fock(params, pair, req.n, req.m, s)
    value, scale = evaluate(size)
    for _ in range(3):
        size *= 2
        new, scale = evaluate(size)
        if _converged(new, value, scale):
            return -0.5 * sigma * new
        last_change = abs(new - value)
        value = new
    raise ConvergenceError(
        f"matrix element ({req.j},{req.n})<->({req.k},{req.m}) not stable under "
        f"{req.method} refinement; last change {last_change:.3e}")


def _window_h0_state(params, level, nq, lo, hi, yvals, q, target_dressed):
    """Eigenvector of the windowed single-level rotated problem near one rung.

    The operator is (number operator) + E_level(y) on Fock states lo..hi; its
    eigenvector with eigenvalue nearest ``target_dressed + nq`` is the
    distorted oscillator state carrying quantum label ``nq``.
    """
    energies = _adiabatic_curve(params, level, yvals)
    h0 = (q * energies) @ q.T
    idx = np.arange(hi - lo + 1)
    h0[idx, idx] += (lo + idx) - float(nq)   # oscillator rungs counted from nq
    vals, vecs = scipy.linalg.eigh(h0, subset_by_value=(target_dressed - 0.45,
                                                        target_dressed + 0.45))
    if vals.size == 0:
        raise ConvergenceError(
            f"no rotated-frame level within 0.45 of the predicted rung (level {level}, n={nq})")
    pick = int(np.argmin(np.abs(vals - target_dressed)))
    vec = vecs[:, pick]
    # deterministic sign so window-size refinement compares like with like
    return vec if vec[np.argmax(np.abs(vec))] >= 0 else -vec


def _adiabatic_curve(params, level, y_sorted):
    from .trilevel import eigenvalues_at
    return eigenvalues_at(params, y_sorted)[:, level - 1]


def v_matrix_element_h0(params: ModelParams, j: int, k: int, n: int, m: int,
                        pad: int = None) -> float:
    """Derivative-coupling element between rotated-frame eigenstates.

    Unlike :func:`v_matrix_element`, the oscillator factors here are the
    eigenfunctions of the single-level rotated problem (the bare oscillator
    distorted by the adiabatic potential), which is what degenerate
    perturbation theory in the rotated frame calls for.  Far-multiphoton
    elements are exponentially sensitive to this distortion.

    Evaluated on a Fock window around the two quantum numbers; the window
    padding doubles until the value is stable.
    """
    if j not in (1, 2, 3) or k not in (1, 2, 3) or j == k:
        raise ValueError(f"levels must be distinct members of 1..3, got ({j}, {k})")
    if n < 0 or m < 0:
        raise ValueError("oscillator quantum numbers must be >= 0")
    from .dressed import wkb_levels
    # rung identification only needs the dressed values to a fraction of one
    # quantum, so a kinked integrand (decoupled-level crossing) is tolerable
    dressed = wkb_levels(params, max(n, m), tol=1e-6)
    sigma = 1.0 if j < k else -1.0
    pair = (min(j, k), max(j, k))

    def evaluate(p):
        lo = max(min(n, m) - p, 0)
        hi = max(n, m) + p
        dim = hi - lo + 1
        yvals, q = eigh_tridiagonal(np.zeros(dim), position_offdiagonal(lo, hi))
        uj = _window_h0_state(params, j, n, lo, hi, yvals, q, dressed[j - 1])
        uk = _window_h0_state(params, k, m, lo, hi, yvals, q, dressed[k - 1])
        f = _coupling_values(params, pair, yvals)
        fmat = (q * f) @ q.T
        dmat = derivative_matrix(lo, hi)
        op = dmat @ fmat + fmat @ dmat
        return float(uj @ op @ uk), float(np.abs(uj) @ (np.abs(op) @ np.abs(uk)))

    size = pad if pad is not None else 4 * abs(n - m) + 96
    value, scale = evaluate(size)
    for _ in range(3):
        size *= 2
        new, scale = evaluate(size)
        if _converged(new, value, scale):
            return -0.5 * sigma * new
        value = new
    raise ConvergenceError(
        f"rotated-frame element ({j},{n})<->({k},{m}) not stable under window refinement")


def w_expectation(params: ModelParams, n: int, method: str = None) -> np.ndarray:
    """Diagonal expectation of the quadratic remainder, per level.

    Returns the three values (1/2) <n| F12^2 + F13^2 |n>,
    (1/2) <n| F12^2 + F23^2 |n>, (1/2) <n| F13^2 + F23^2 |n>, all >= 0.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if method is None:
        method = METHOD_HERMITE if n <= HERMITE_MAX_N else METHOD_FOCK
    if method == METHOD_HERMITE:
        if n > HERMITE_MAX_N:
            raise ValueError(f"{METHOD_HERMITE} supports n <= {HERMITE_MAX_N}")
        def evaluate(order):
            y = roots_hermite(order)[0]
            rows = eigenfunction_rows(y, sorted({order - 1, n}))
            row = {k: rows[i] for i, k in enumerate(sorted({order - 1, n}))}
            w = 1.0 / (order * row[order - 1] ** 2)
            dens = w * row[n] ** 2
            inside = _classical_mask(y, n)
            s12 = np.zeros(y.size)
            s13 = np.zeros(y.size)
            s23 = np.zeros(y.size)
            s12[inside], s13[inside], s23[inside] = _coupling_squares(params, y[inside])
            return np.array([np.sum(dens * (s12 + s13)),
                             np.sum(dens * (s12 + s23)),
                             np.sum(dens * (s13 + s23))]) / 2.0
        size = 2 * n + 64
    elif method == METHOD_FOCK:
        def evaluate(pad):
            lo = max(n - pad, 0)
            hi = n + pad
            dim = hi - lo + 1
            yvals, q = eigh_tridiagonal(np.zeros(dim), position_offdiagonal(lo, hi))
            dens = q[n - lo] ** 2
            g, _, _ = _coupling_batch(params, yvals)
            s12, s13, s23 = g[:, 0, 1] ** 2, g[:, 0, 2] ** 2, g[:, 1, 2] ** 2
            return np.array([np.sum(dens * (s12 + s13)),
                             np.sum(dens * (s12 + s23)),
                             np.sum(dens * (s13 + s23))]) / 2.0
        size = 96
    else:
        raise ValueError(f"unknown method {method!r}")
    value = evaluate(size)
    for _ in range(3):
        size *= 2
        new = evaluate(size)
        if np.all(np.abs(new - value) <= _REL_TOL * np.abs(new) + _ABS_FLOOR):
            return new
        value = new
    raise ConvergenceError(f"diagonal remainder at n={n} not stable under {method} refinement")
