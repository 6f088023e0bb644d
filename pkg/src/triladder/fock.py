"""Exact reference solver on a truncated Fock window.

The full Hamiltonian conserves the parity of (level index + oscillator
quantum), so each parity sector is a real symmetric banded matrix on the
product basis {level i} x {n0-W .. n0+W}.  Energies are assembled with the
n0 * hbar_omega0 ladder offset removed, which keeps eigenvalues accurate to
machine precision even at n0 = 1e8; reported energies add the offset back.

Besides plain diagonalization the module continues eigenpairs along coupling
sweeps by eigenvector overlap (energy order swaps at every anticrossing, the
vectors do not), locates anticrossing gap minima by golden-section search,
and rasterizes resonance-sharpness maps from the tracked exact spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
from scipy.optimize import linear_sum_assignment

from .errors import ConvergenceError, TrackingError
from .trilevel import ModelParams

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

#: resolve tracked-state identities only when the best overlap clears this
OVERLAP_FLOOR = 0.5

#: two candidate overlaps closer than this make the assignment ambiguous
AMBIGUITY = 1e-3


def _parity_bit(parity):
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    return 0 if parity == "even" else 1


@dataclass(frozen=True, eq=False)
class FockWindowHamiltonian:
    """One parity sector of the windowed Hamiltonian in banded storage.

    ``bands`` holds the lower bands (diagonal first); the stored diagonal has
    the n0 offset subtracted, recorded in ``energy_offset``.  ``labels`` lists
    the (level, quantum-number) pair of every basis state in matrix order.
    """

    params: ModelParams
    n0: int
    half_width: int
    parity: str
    labels: np.ndarray
    bands: np.ndarray
    energy_offset: float

    @property
    def dim(self) -> int:
        return self.labels.shape[0]

    def dense(self, with_offset=False) -> np.ndarray:
        """Dense symmetric matrix (mostly for small cross-checks)."""
        dim = self.dim
        m = np.zeros((dim, dim))
        m[np.diag_indices(dim)] = self.bands[0]
        for r in range(1, self.bands.shape[0]):
            idx = np.arange(dim - r)
            m[idx + r, idx] = self.bands[r, :dim - r]
            m[idx, idx + r] = self.bands[r, :dim - r]
        if with_offset:
            m[np.diag_indices(dim)] += self.energy_offset
        return m

    def matvec(self, x) -> np.ndarray:
        """Product of the (offset-removed) matrix with vectors (dim,) or (dim, k)."""
        x = np.asarray(x)
        y = self.bands[0].reshape(-1, *([1] * (x.ndim - 1))) * x
        for r in range(1, self.bands.shape[0]):
            band = self.bands[r, :self.dim - r].reshape(-1, *([1] * (x.ndim - 1)))
            y[r:] += band * x[:-r]
            y[:-r] += band * x[r:]
        return y

    def norm_estimate(self) -> float:
        """Upper bound on the spectral norm from row sums of the bands."""
        dim = self.dim
        total = np.abs(self.bands[0]).copy()
        for r in range(1, self.bands.shape[0]):
            band = np.abs(self.bands[r, :dim - r])
            total[r:] += band
            total[:-r] += band
        return float(total.max())

    def index_of(self, level, nq) -> int:
        """Matrix index of basis state (level, nq)."""
        hit = np.nonzero((self.labels[:, 0] == level) & (self.labels[:, 1] == nq))[0]
        if hit.size != 1:
            raise KeyError(f"state ({level}, {nq}) not in this window/sector")
        return int(hit[0])


def sector_labels(n0, half_width, parity) -> np.ndarray:
    """(level, n) pairs of one parity sector, ordered by n then level."""
    bit = _parity_bit(parity)
    out = []
    for nq in range(n0 - half_width, n0 + half_width + 1):
        for lvl in (1, 2, 3):
            if (lvl + nq) % 2 == bit:
                out.append((lvl, nq))
    return np.array(out, dtype=np.int64)


def build_hamiltonian(params: ModelParams, n0: int, half_width: int,
                      parity: str) -> FockWindowHamiltonian:
    """Assemble one parity sector of the windowed Hamiltonian.

    Diagonal entries are e_i + (n - n0); ladder couplings connect
    (1, n) <-> (2, n +- 1) with amplitude u * sqrt(max n) and
    (2, n) <-> (3, n +- 1) with amplitude v * sqrt(max n).
    """
    n0 = int(n0)
    half_width = int(half_width)
    if half_width < 8:
        raise ValueError("window half-width must be at least 8")
    if n0 - half_width < 0:
        raise ValueError(f"window underflows the vacuum: n0={n0}, W={half_width}")
    labels = sector_labels(n0, half_width, parity)
    dim = labels.shape[0]
    evals = np.array([params.e1, params.e2, params.e3])
    bands = np.zeros((3, dim))
    bands[0] = evals[labels[:, 0] - 1] + (labels[:, 1] - n0)

    index = {(int(l), int(nq)): i for i, (l, nq) in enumerate(labels)}
    for (lvl, amp) in ((1, params.u), (2, params.v)):
        for i, (l, nq) in enumerate(labels):
            if l != lvl:
                continue
            partner = index.get((lvl + 1, nq + 1))
            if partner is not None:
                off = partner - i
                bands[off, i] = amp * math.sqrt(nq + 1)
            partner = index.get((lvl + 1, nq - 1))
            if partner is not None:
                # partner sits below i in the ordering
                off = i - partner
                bands[off, partner] = amp * math.sqrt(nq)
    return FockWindowHamiltonian(params, n0, half_width, parity, labels,
                                 bands, float(n0))


def _solve_banded_range(h, lo, hi):
    """Eigenpairs with (offset-removed) eigenvalues in [lo, hi]."""
    try:
        vals, vecs = scipy.linalg.eig_banded(h.bands, lower=True, select="v",
                                             select_range=(lo, hi))
    except scipy.linalg.LinAlgError:
        if h.dim > 6000:
            raise
        dense = h.dense()
        vals, vecs = scipy.linalg.eigh(dense)
        keep = (vals >= lo) & (vals <= hi)
        vals, vecs = vals[keep], vecs[:, keep]
    return vals, vecs


def _sparse_from_bands(h):
    dim = h.dim
    rows = [h.bands[0]]
    offsets = [0]
    for r in range(1, h.bands.shape[0]):
        band = h.bands[r, :dim - r]
        rows += [band, band]
        offsets += [-r, r]
    return scipy.sparse.diags(rows, offsets, format="csc")


def _cluster_targets(targets, width=3.0):
    targets = np.sort(np.asarray(targets, dtype=float))
    groups = [[targets[0]]]
    for t in targets[1:]:
        if t - groups[-1][-1] <= width:
            groups[-1].append(t)
        else:
            groups.append([t])
    return groups


def _shift_invert_near(h, targets):
    """Eigenpairs around each target via shift-invert Lanczos.

    Duplicates from overlapping shifts are removed by eigenvalue proximity
    plus vector overlap (a genuinely tight anticrossing pair stays distinct
    because its two vectors are orthogonal).  Deterministic: the start vector
    is fixed.
    """
    a = _sparse_from_bands(h)
    v0 = np.full(h.dim, 1.0 / math.sqrt(h.dim))
    vals_out, vecs_out = [], []
    for group in _cluster_targets(targets):
        sigma = float(np.mean(group)) + 1.1e-4
        k = min(4 + 3 * len(group), h.dim - 1)
        for attempt in range(3):
            try:
                vals, vecs = scipy.sparse.linalg.eigsh(a, k=k, sigma=sigma, v0=v0)
                break
            except Exception:
                sigma += 0.0137 * (attempt + 1)
        else:
            raise ConvergenceError(f"shift-invert did not converge near {group}")
        vals_out.append(vals)
        vecs_out.append(vecs)
    vals = np.concatenate(vals_out)
    vecs = np.concatenate(vecs_out, axis=1)
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    keep = [0]
    for i in range(1, vals.size):
        if vals[i] - vals[keep[-1]] < 1e-6 and abs(vecs[:, i] @ vecs[:, keep[-1]]) > 0.5:
            continue
        keep.append(i)
    return vals[keep], vecs[:, keep]


def eigen_near(h: FockWindowHamiltonian, target: float, count: int):
    """The ``count`` eigenpairs nearest ``target`` (absolute energies).

    Residuals are verified against 1e-9 of the window norm and the vectors
    against 1e-10 orthonormality before returning.
    """
    if count < 1 or count > h.dim:
        raise ValueError(f"count must be within 1..{h.dim}")
    st = target - h.energy_offset
    radius = 1.0 + 0.75 * count
    for _ in range(12):
        vals, vecs = _solve_banded_range(h, st - radius, st + radius)
        if vals.size >= count:
            break
        radius *= 2.0
    else:
        raise ConvergenceError("could not collect enough eigenvalues near target")
    order = np.argsort(np.abs(vals - st), kind="stable")[:count]
    order = order[np.argsort(vals[order], kind="stable")]
    vals, vecs = vals[order], vecs[:, order]
    resid = h.matvec(vecs) - vals * vecs
    if np.max(np.linalg.norm(resid, axis=0)) > 1e-9 * h.norm_estimate():
        raise ConvergenceError("eigenpair residual above tolerance")
    gram = vecs.T @ vecs - np.eye(count)
    if np.max(np.abs(gram)) > 1e-10:
        raise ConvergenceError("eigenvectors lost orthonormality")
    return vals + h.energy_offset, vecs


@dataclass(eq=False)
class TrackedLevels:
    """Eigenvalue curves continued along a coupling sweep by vector overlap."""

    which: list
    gs: np.ndarray              # (steps, 2) sweep points in (g1, g2)
    energies: np.ndarray        # (steps, L) absolute eigenvalues
    overlaps: np.ndarray        # (steps, L); first row is 1
    relabelings: list           # (step index, note) where the energy order changed
    vectors: np.ndarray         # (dim, L) eigenvectors at the final point
    step_vectors: np.ndarray = None   # (steps, dim, L) when recording was requested


class _SweepSolver:
    """Shared machinery: assemble-at-g, solve near previous values, assign."""

    def __init__(self, template, n0, half_width, parity, margin=6.0):
        self.template = template
        self.n0 = int(n0)
        self.half_width = int(half_width)
        self.parity = parity
        self.margin = margin

    def hamiltonian(self, g):
        params = self.template.with_couplings(g[0], g[1])
        return build_hamiltonian(params, self.n0, self.half_width, self.parity)

    def solve_near(self, g, centers_abs, margin=None):
        h = self.hamiltonian(g)
        margin = self.margin if margin is None else margin
        st = np.asarray(centers_abs, dtype=float) - h.energy_offset
        if g[0] == 0.0 and g[1] == 0.0:
            # exactly diagonal; basis states are exact and degenerate
            # multiplets must not be left to an iterative solver's whim
            lo, hi = st.min() - margin, st.max() + margin
            idx = np.nonzero((h.bands[0] >= lo) & (h.bands[0] <= hi))[0]
            vecs = np.zeros((h.dim, idx.size))
            vecs[idx, np.arange(idx.size)] = 1.0
            return h.bands[0][idx] + h.energy_offset, vecs, h
        try:
            vals, vecs = _shift_invert_near(h, st)
        except ConvergenceError:
            vals, vecs = _solve_banded_range(h, st.min() - margin, st.max() + margin)
        if vals.size == 0:
            raise TrackingError(f"no eigenvalues within {margin} of the tracked window")
        return vals + h.energy_offset, vecs, h

    def assign(self, prev_vecs, vals, vecs):
        """Best permutation of candidates onto tracked states.

        Returns (values, vectors, quality, runner_up) for the tracked columns.
        """
        overlap = np.abs(vecs.T @ prev_vecs)      # (cand, L)
        nstate = prev_vecs.shape[1]
        if overlap.shape[0] < nstate:
            raise TrackingError("fewer candidates than tracked states")
        rows, cols = linear_sum_assignment(-overlap)
        pick = np.empty(nstate, dtype=int)
        pick[cols] = rows
        quality = overlap[pick, np.arange(nstate)]
        runner = np.empty(nstate)
        for j in range(nstate):
            others = np.delete(overlap[:, j], pick[j])
            runner[j] = others.max() if others.size else 0.0
        return vals[pick], vecs[:, pick], quality, runner


def track_levels(template: ModelParams, start, end, steps: int, n0: int,
                 half_width: int, which, *, parity: str = None,
                 start_vectors=None, margin: float = 6.0,
                 max_refines: int = 14, keep_vectors: bool = False) -> TrackedLevels:
    """Continue labelled eigenstates along a straight line in (g1, g2).

    ``which`` lists (level, quantum-number) labels; all must live in one
    parity sector.  The sweep must start at zero coupling (where the labels
    are exact basis states) unless ``start_vectors`` supplies the starting
    eigenvectors explicitly.  Steps are bisected automatically whenever the
    consecutive overlap of any tracked state drops below 0.5; an assignment
    whose best and runner-up overlaps agree within 1e-3 raises TrackingError.
    """
    which = [(int(j), int(nq)) for j, nq in which]
    bits = {(j + nq) % 2 for j, nq in which}
    if len(bits) != 1:
        raise ValueError("tracked states must share one parity sector")
    if parity is None:
        parity = "even" if bits.pop() == 0 else "odd"
    solver = _SweepSolver(template, n0, half_width, parity, margin)

    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    h0 = solver.hamiltonian(start)
    idx = [h0.index_of(j, nq) for j, nq in which]
    guess = h0.bands[0][idx] + h0.energy_offset
    if start_vectors is None:
        if np.any(start != 0.0):
            raise ValueError("sweeps must start at (0, 0) unless start_vectors is given")
        vecs = np.zeros((h0.dim, len(which)))
        for col, i in enumerate(idx):
            vecs[i, col] = 1.0
        vals = guess
    else:
        anchors = np.asarray(start_vectors, dtype=float)
        if anchors.shape != (h0.dim, len(which)):
            raise ValueError("start_vectors must be (dim, len(which))")
        cand_vals, cand_vecs, _ = solver.solve_near(start, guess, margin)
        vals, vecs, quality, _ = solver.assign(anchors, cand_vals, cand_vecs)
        if np.any(quality < OVERLAP_FLOOR):
            raise TrackingError("start_vectors do not identify eigenstates at the sweep start")
    ts = np.linspace(0.0, 1.0, steps)
    energies = [vals]
    overlaps = [np.ones(len(which))]
    relabel = []

    def advance(t_from, t_to, vals, vecs, depth):
        g = start + t_to * (end - start)
        cand_vals, cand_vecs, _ = solver.solve_near(g, vals, margin)
        try:
            new_vals, new_vecs, quality, runner = solver.assign(vecs, cand_vals, cand_vecs)
        except TrackingError:
            quality = np.zeros(len(which))
            new_vals = new_vecs = runner = None
        if new_vals is not None and np.all(quality >= OVERLAP_FLOOR):
            close = np.abs(quality - runner) < AMBIGUITY
            if np.any(close):
                raise TrackingError(
                    f"ambiguous level identity at g={tuple(g)}: overlaps within {AMBIGUITY}")
            return new_vals, new_vecs
        if depth >= max_refines:
            raise TrackingError(f"overlap tracking failed near g={tuple(g)}")
        t_mid = 0.5 * (t_from + t_to)
        vals, vecs = advance(t_from, t_mid, vals, vecs, depth + 1)
        return advance(t_mid, t_to, vals, vecs, depth + 1)

    kept = [vecs.copy()] if keep_vectors else None
    for s in range(1, steps):
        new_vals, new_vecs = advance(ts[s - 1], ts[s], vals, vecs, 0)
        prev_order = np.argsort(vals, kind="stable")
        new_order = np.argsort(new_vals, kind="stable")
        if not np.array_equal(prev_order, new_order):
            relabel.append((s, "energy order changed"))
        quality = np.abs(np.einsum("ij,ij->j", new_vecs, vecs))
        vals, vecs = new_vals, new_vecs
        energies.append(vals)
        overlaps.append(quality)
        if keep_vectors:
            kept.append(vecs.copy())

    gs = start + ts[:, None] * (end - start)
    return TrackedLevels(which, gs, np.array(energies), np.array(overlaps),
                         relabel, vecs,
                         np.array(kept) if keep_vectors else None)


def central_labels(transition, n0):
    """Parity-consistent (level, quantum) labels for a transition near n0.

    Both states land in one sector for odd quantum exchange.
    """
    j, k = transition
    nb = n0 if (j + n0) % 2 == 0 else n0 + 1
    return nb


def exact_dressed_levels(template: ModelParams, g1: float, g2: float, n0: int,
                         half_width: int, *, steps: int = None,
                         check_window: bool = False) -> np.ndarray:
    """Dressed energies of the three levels from the exact windowed spectrum.

    Tracks the states labelled (1, .), (2, .), (3, .) near the window centre
    from zero coupling to (g1, g2) and subtracts each state's own ladder
    offset.  With ``check_window`` the values are re-derived at doubled window
    width and must agree to 1e-8.
    """
    n0 = int(n0)
    nq = [n0 + 1 if (j + n0) % 2 else n0 for j in (1, 2, 3)]
    which = list(zip((1, 2, 3), nq))
    if steps is None:
        steps = max(12, int(18 * math.hypot(g1, g2)) + 2)

    def run(width):
        tr = track_levels(template, (0.0, 0.0), (g1, g2), steps, n0, width, which)
        return tr.energies[-1] - np.array(nq, dtype=float)

    dressed = run(half_width)
    if check_window:
        wide = run(2 * half_width)
        if np.max(np.abs(wide - dressed)) > 1e-8:
            raise ConvergenceError(
                f"dressed levels moved by {np.max(np.abs(wide - dressed)):.2e} "
                "when the window width doubled")
        dressed = wide
    return dressed


# ---------------------------------------------------------------------------
# anticrossing gaps


@dataclass(eq=False)
class GapScan:
    """Result of minimizing the gap between two tracked states along a line."""

    transition: tuple
    delta_n: int
    g_star: tuple               # (g1, g2) at the global gap minimum
    gap: float                  # minimal |E_a - E_b|
    minima: list                # [(g1, g2, gap)] for every local minimum found
    ts: np.ndarray              # scan parameter values
    gaps: np.ndarray            # scanned gap values


class _PairTracker:
    """Continue a two-state subspace along a line and expose the gap."""

    def __init__(self, solver, line_start, line_end, margin=4.0):
        self.solver = solver
        self.start = np.asarray(line_start, dtype=float)
        self.end = np.asarray(line_end, dtype=float)
        self.margin = margin

    def g_of(self, t):
        return self.start + t * (self.end - self.start)

    def pair_at(self, t, anchor_vals, anchor_vecs):
        vals, vecs, _ = self.solver.solve_near(self.g_of(t), anchor_vals, self.margin)
        score = np.sum((vecs.T @ anchor_vecs) ** 2, axis=1)
        if score.size < 2:
            raise TrackingError("pair tracking lost both states")
        top = np.argsort(score, kind="stable")[-2:]
        top = top[np.argsort(vals[top], kind="stable")]
        return vals[top], vecs[:, top]


def anticrossing_gap(template: ModelParams, line, delta_n: int, transition,
                     n0: int, half_width: int, *, scan_points: int = 101,
                     vicinity: float = 0.08, tol_g: float = 1e-5,
                     approach_steps: int = 24, verify_window: bool = True,
                     quad_nodes: int = 512, mode: str = "pair") -> GapScan:
    """Locate and refine the avoided-crossing gap of one resonance.

    ``line`` is a pair of (g1, g2) endpoints starting at zero coupling.  The
    resonance location is first estimated from the dressed (orbit-averaged)
    transition energy, the two resonant states are tracked out to the
    vicinity, the gap is scanned on ``scan_points`` points and every local
    minimum is polished by golden-section search down to a parameter
    resolution of ``tol_g``.  The reported gap must be stable to 1 percent
    when the window width doubles, unless ``verify_window`` is switched off.

    ``mode="pair"`` continues the two-state subspace, which is the robust
    choice for an isolated anticrossing.  ``mode="nearest"`` continues only
    the first (lower-level) state and profiles its distance to whichever
    eigenvalue comes closest; use it where a third level interferes and the
    single predicted resonance splits into several.
    """
    from .dressed import _transition_gap  # local import to keep modules acyclic

    j, k = transition
    if delta_n % 2 == 0 or delta_n <= 0:
        raise ValueError(f"anticrossings exchange an odd number of quanta, got {delta_n}")
    start = np.asarray(line[0], dtype=float)
    end = np.asarray(line[1], dtype=float)
    if np.any(start != 0.0):
        raise ValueError("gap scans start from zero coupling")

    n0 = int(n0)

    def dressed_mismatch(t):
        g = start + t * (end - start)
        return _transition_gap(template, g[0], g[1], (j, k), n0, quad_nodes) - delta_n

    lo, hi = 1e-6, 1.0
    flo, fhi = dressed_mismatch(lo), dressed_mismatch(hi)
    if flo * fhi > 0:
        raise ConvergenceError(
            f"the ({j},{k}) resonance with {delta_n} quanta does not cross this line")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = dressed_mismatch(mid)
        if abs(fm) < 1e-8:
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    t_star = mid

    nb = central_labels((j, k), n0)
    which = [(j, nb), (k, nb - delta_n)]
    t_lo = max(t_star * (1.0 - vicinity), 1e-9)
    t_hi = min(t_star * (1.0 + vicinity), 1.0)

    approach = track_levels(template, tuple(start), tuple(start + t_lo * (end - start)),
                            approach_steps, n0, half_width, which)
    solver = _SweepSolver(template, n0, half_width,
                          "even" if (j + nb) % 2 == 0 else "odd")
    tracker = _PairTracker(solver, start, end)

    ts = np.linspace(t_lo, t_hi, scan_points)
    if mode == "pair":
        vals, vecs = approach.energies[-1], approach.vectors
        scan_vals, scan_vecs, gaps = [], [], []
        for t in ts:
            vals, vecs = tracker.pair_at(t, vals, vecs)
            scan_vals.append(vals)
            scan_vecs.append(vecs)
            gaps.append(abs(vals[1] - vals[0]))
    elif mode == "nearest":
        # follow the bra state diabatically and measure its distance to the
        # nearest neighbour; the anchor vector only updates where the identity
        # is unambiguous, so sitting inside a hybridization zone does not
        # switch the continuation onto the partner branch
        val = approach.energies[-1][:1]
        anchor = approach.vectors[:, :1]
        scan_vals, scan_vecs, gaps = [], [], []
        for t in ts:
            cand_vals, cand_vecs, _ = solver.solve_near(tracker.g_of(t), val, 4.0)
            ovl = np.abs(cand_vecs.T @ anchor)[:, 0]
            pick = int(np.argmax(ovl))
            val = cand_vals[pick:pick + 1]
            if ovl[pick] >= 0.9:
                anchor = cand_vecs[:, pick:pick + 1]
            others = np.delete(cand_vals, pick)
            scan_vals.append(val)
            scan_vecs.append(anchor)
            gaps.append(np.min(np.abs(others - val[0])) if others.size else np.inf)
    else:
        raise ValueError(f"unknown scan mode {mode!r}")
    gaps = np.array(gaps)

    interior = np.nonzero((gaps[1:-1] <= gaps[:-2]) & (gaps[1:-1] <= gaps[2:]))[0] + 1
    if interior.size == 0:
        raise ConvergenceError("no interior gap minimum inside the scan vicinity; widen it")
    # collapse plateaus of equal neighbouring values
    keep = [interior[0]]
    for i in interior[1:]:
        if i != keep[-1] + 1:
            keep.append(i)

    def gap_at(t):
        ref = int(np.clip(np.searchsorted(ts, t), 1, len(ts) - 1))
        near = ref if abs(ts[ref] - t) < abs(ts[ref - 1] - t) else ref - 1
        if mode == "pair":
            vals, _ = tracker.pair_at(t, scan_vals[near], scan_vecs[near])
            return abs(vals[1] - vals[0])
        cand_vals, cand_vecs, _ = solver.solve_near(tracker.g_of(t), scan_vals[near], 4.0)
        pick = int(np.argmax(np.abs(cand_vecs.T @ scan_vecs[near])))
        others = np.delete(cand_vals, pick)
        return float(np.min(np.abs(others - cand_vals[pick])))

    minima = []
    span_g = np.linalg.norm(end - start)
    for i in keep:
        a, b = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
        # golden-section shrink; keep going below tol_g until the bottom of the
        # hyperbola is resolved (the bracket width no longer biases the value)
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc, fd = gap_at(c), gap_at(d)
        best = math.inf
        stall = 0
        for _ in range(200):
            if (b - a) * span_g <= 1e-10:
                break
            # past the requested resolution, keep going only while the bottom
            # still improves (a hyperbola flattens out, an exact crossing
            # keeps dropping all the way to the width floor); golden steps
            # fail to improve on alternate iterations, hence the stall count
            if min(fc, fd) < best * (1.0 - 1e-3):
                best = min(fc, fd)
                stall = 0
            else:
                stall += 1
            if (b - a) * span_g <= tol_g and stall >= 12:
                break
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - _GOLDEN * (b - a)
                fc = gap_at(c)
            else:
                a, c, fc = c, d, fd
                d = a + _GOLDEN * (b - a)
                fd = gap_at(d)
        t_min = 0.5 * (a + b)
        g_min = tuple(tracker.g_of(t_min))
        minima.append((g_min[0], g_min[1], gap_at(t_min)))

    minima.sort(key=lambda m: m[2])
    g1s, g2s, best = minima[0]

    if verify_window:
        t_min = np.linalg.norm(np.array([g1s, g2s]) - start) / span_g
        ref = int(np.clip(np.searchsorted(ts, t_min), 1, len(ts) - 1))
        wide = _SweepSolver(template, n0, 2 * half_width, solver.parity)
        wide_h = wide.hamiltonian((g1s, g2s))
        anchors = _embed_vectors(scan_vecs[ref], solver, wide_h)
        vals, vecs, _ = wide.solve_near((g1s, g2s), scan_vals[ref], 4.0)
        if mode == "pair":
            score = np.sum((vecs.T @ anchors) ** 2, axis=1)
            top = np.argsort(score, kind="stable")[-2:]
            wide_gap = abs(np.diff(np.sort(vals[top]))[0])
        else:
            pick = int(np.argmax(np.abs(vecs.T @ anchors)))
            others = np.delete(vals, pick)
            wide_gap = float(np.min(np.abs(others - vals[pick])))
        # gaps below 1e-9 are zero to solver tolerance; no relative check there
        if abs(wide_gap - best) > 0.01 * max(best, 1e-9):
            raise ConvergenceError(
                f"gap changed from {best:.3e} to {wide_gap:.3e} when the window doubled")

    minima.sort(key=lambda m: (m[0], m[1]))
    return GapScan((j, k), int(delta_n), (g1s, g2s), float(best),
                   minima, ts, gaps)


def _embed_vectors(vecs, solver, wide_h):
    """Zero-pad sector vectors from a narrow window into a wider one."""
    narrow = sector_labels(solver.n0, solver.half_width, solver.parity)
    out = np.zeros((wide_h.dim, vecs.shape[1]))
    rows = [wide_h.index_of(int(l), int(nq)) for l, nq in narrow]
    out[rows] = vecs
    return out


# ---------------------------------------------------------------------------
# resonance-sharpness maps


#: inverse resonance mismatch is reported no larger than this
SHARPNESS_CAP = 1e6


def resonance_sharpness_map(template: ModelParams, transition, g1_grid, g2_grid,
                            n0: int, half_width: int):
    """Inverse distance of the exact dressed transition to the nearest odd rung.

    Returns a record array with fields g1, g2, diff (dressed transition
    energy), delta_n (nearest odd quantum count), sharpness (capped inverse
    mismatch) and ok (False where tracking failed; such points carry NaN).

    The exact dressed energies come from overlap-tracked windowed eigenvalues:
    one sweep up the g2 axis seeds the start vectors of every constant-g2 row.
    """
    j, k = transition
    g1_grid = np.asarray(g1_grid, dtype=float)
    g2_grid = np.asarray(g2_grid, dtype=float)
    if g1_grid[0] != 0.0:
        g1_grid = np.concatenate([[0.0], g1_grid])
        drop_first = True
    else:
        drop_first = False
    n0 = int(n0)
    nq = {lvl: (n0 + 1 if (lvl + n0) % 2 else n0) for lvl in (j, k)}
    which = [(j, nq[j]), (k, nq[k])]

    seed_start = g2_grid[0] == 0.0
    col_g2 = g2_grid if seed_start else np.concatenate([[0.0], g2_grid])
    # rows and the seeding column are swept as straight lines with uniform
    # steps, so the recorded points only match the requested grids when these
    # are uniform once the zero-coupling anchor is counted
    for name, grid in (("g1", g1_grid), ("g2", col_g2)):
        if grid.size > 1 and not np.allclose(np.diff(grid), grid[1] - grid[0]):
            raise ValueError(f"{name} grid must be uniformly spaced from zero coupling")
    column = track_levels(template, (0.0, 0.0), (0.0, col_g2[-1]),
                          len(col_g2), n0, half_width, which, keep_vectors=True)

    rows = []
    for row_idx, g2 in enumerate(g2_grid):
        col_idx = row_idx if seed_start else row_idx + 1
        try:
            tr = track_levels(template, (0.0, g2), (g1_grid[-1], g2), len(g1_grid),
                              n0, half_width, which,
                              start_vectors=column.step_vectors[col_idx])
            diffs = (tr.energies[:, 1] - nq[k]) - (tr.energies[:, 0] - nq[j])
            ok = np.ones(len(g1_grid), dtype=bool)
        except TrackingError:
            diffs = np.full(len(g1_grid), np.nan)
            ok = np.zeros(len(g1_grid), dtype=bool)
        for col, g1 in enumerate(g1_grid):
            if drop_first and col == 0:
                continue
            d = diffs[col]
            if np.isnan(d):
                rows.append((g1, g2, np.nan, -1, np.nan, False))
                continue
            best = max(1, 2 * int(round((d - 1.0) / 2.0)) + 1)
            mismatch = abs(d - best)
            sharp = SHARPNESS_CAP if mismatch <= 1.0 / SHARPNESS_CAP else 1.0 / mismatch
            rows.append((g1, g2, d, best, sharp, bool(ok[col])))
    return np.array(rows, dtype=[("g1", float), ("g2", float), ("diff", float),
                                 ("delta_n", int), ("sharpness", float), ("ok", bool)])
