"""Self-contained numerical kernels.

- herm_eig: full spectral decomposition of a complex Hermitian matrix by
  cyclic Jacobi rotations, deterministic for fixed input.
- nnls: Lawson-Hanson active-set nonnegative least squares.
- dykstra_psd_feasibility: alternating projections with Dykstra correction
  for the intersection of an affine block system with a product of PSD
  cones, returning a feasible point, infeasibility evidence, or a budget
  verdict.

Everything here is plain numpy; no SDP solver is involved.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, NumericInputError
from .spaces import hermitize


# --- Hermitian eigendecomposition ---------------------------------------------

@dataclass
class EigResult:
    eigenvalues: np.ndarray   # ascending
    eigenvectors: np.ndarray  # unitary, columns match eigenvalues
    sweeps: int


def herm_eig(h, tol=1e-14, max_sweeps=60):
    """Eigendecomposition of a Hermitian matrix via cyclic Jacobi rotations.

    Parameters
    ----------
    h : (n, n) array_like
        Hermitian matrix; the upper triangle is authoritative.
    tol : float
        Sweep convergence threshold on the off-diagonal Frobenius norm,
        relative to the input norm.
    max_sweeps : int
        Hard cap on full cyclic sweeps.

    Returns
    -------
    EigResult
        Eigenvalues ascending; eigenvector columns phase-fixed so that the
        first significant component of each column is real positive, which
        makes the output deterministic.
    """
    a = np.asarray(h, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NumericInputError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise NumericInputError("matrix contains non-finite entries")
    a = hermitize(a)
    n = a.shape[0]
    scale = max(np.linalg.norm(a), 1.0)
    v = np.eye(n, dtype=complex)
    if n == 1:
        return EigResult(a.real.reshape(1).copy(), v, 0)

    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            sweeps -= 1
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = np.sign(theta) if theta != 0 else 1.0
                    t /= abs(theta) + np.hypot(1.0, theta)
                c = 1.0 / np.hypot(1.0, t)
                s = t * c

                # A <- U* A U with U = [[c, s*phase], [-s*conj(phase), c]] on (p, q)
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(phase) * col_q
                a[:, q] = s * phase * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * np.conj(phase) * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real

                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * np.conj(phase) * vq
                v[:, q] = s * phase * vp + c * vq

    vals = np.diag(a).real.copy()
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = v[:, order]
    # Phase convention: first significant component real positive.
    for j in range(n):
        col = vecs[:, j]
        idx = int(np.argmax(np.abs(col) > 1e-12 * max(1.0, np.abs(col).max())))
        z = col[idx]
        if abs(z) > 0:
            vecs[:, j] = col * (np.conj(z) / abs(z))
    return EigResult(vals, vecs, sweeps)


def psd_project(h):
    """Nearest PSD matrix by clipping negative eigenvalues.

    Returns (projection, min_eigenvalue_of_input).
    """
    res = herm_eig(h)
    clipped = np.clip(res.eigenvalues, 0.0, None)
    proj = (res.eigenvectors * clipped) @ res.eigenvectors.conj().T
    return hermitize(proj), float(res.eigenvalues[0])


def _psd_project_batch(stack):
    """Eigenvalue clipping over a stack of Hermitian matrices (hot path)."""
    w, v = np.linalg.eigh(stack)
    wc = np.clip(w, 0.0, None)
    out = np.matmul(v * wc[:, None, :], np.conjugate(np.swapaxes(v, -1, -2)))
    return hermitize(out), w


# --- nonnegative least squares --------------------------------------------------

@dataclass
class NnlsResult:
    coeffs: np.ndarray
    residual: float
    converged: bool
    iterations: int


def nnls(a, b, max_iter=None, tol=None):
    """Solve min ||a x - b||_2 subject to x >= 0 (Lawson-Hanson active set).

    Parameters
    ----------
    a : (m, g) array_like
    b : (m,) array_like
    max_iter : int, optional
        Cap on passive-set changes; default 3*g.  Hitting the cap returns
        the best iterate with converged=False instead of raising.
    tol : float, optional
        Dual feasibility tolerance; default scales with the problem data.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.ndim != 2 or a.shape[0] != b.shape[0]:
        raise NumericInputError(f"incompatible shapes {a.shape} and {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise NumericInputError("nnls inputs contain non-finite entries")
    m, g = a.shape
    if max_iter is None:
        max_iter = 3 * g
    if tol is None:
        tol = 10 * max(m, g) * np.finfo(float).eps * max(np.abs(a).sum(axis=0).max(), 1.0) \
            * max(np.linalg.norm(b), 1.0)

    x = np.zeros(g)
    passive = np.zeros(g, dtype=bool)
    resid = b.copy()
    iters = 0
    converged = True
    while iters < max_iter:
        grad = a.T @ resid
        grad[passive] = -np.inf
        j = int(np.argmax(grad))
        if grad[j] <= tol:
            break
        iters += 1
        passive[j] = True
        while True:
            cols = np.flatnonzero(passive)
            z = np.zeros(g)
            sol, *_ = np.linalg.lstsq(a[:, cols], b, rcond=None)
            z[cols] = sol
            if np.all(z[cols] > 0):
                x = z
                break
            # Step back to the boundary of the feasible region.
            mask = z < x  # candidates that crossed zero, strictly decreasing coords
            mask &= passive
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(mask, x / (x - z), np.inf)
            alpha = float(np.min(ratios))
            x = x + alpha * (z - x)
            passive &= x > 1e-15
            x[~passive] = 0.0
        resid = b - a @ x
    else:
        converged = False

    return NnlsResult(x, float(np.linalg.norm(resid)), converged, iters)


# --- Dykstra feasibility over affine system + PSD product cone ------------------

@dataclass
class FeasResult:
    """Outcome of a PSD feasibility run.

    status is one of "feasible", "infeasible_evidence", "budget".  `point`
    (g, n, n) satisfies the affine system exactly by construction when
    present.  `separator` holds a candidate separating direction: a stack
    in variable space ("variable") when the alternating gap stalls, or in
    constraint space ("constraint") when the affine system itself is
    inconsistent.
    """

    status: str
    point: np.ndarray | None
    gap: float
    min_eig: float
    iterations: int
    separator_space: str | None = None
    separator: np.ndarray | None = None
    gap_history: list = field(default_factory=list)


def dykstra_psd_feasibility(coeff, rhs, tol=1e-8, max_iter=50000,
                            stall_window=200, stall_rel=1e-7):
    """Find Hermitian PSD blocks Q_1..Q_g with sum_j coeff[k, j] Q_j = rhs[k].

    Alternates projection onto the affine subspace (closed form through a
    precomputed pseudoinverse) and the PSD product cone (eigenvalue
    clipping per block) with a Dykstra correction on the cone side.

    Parameters
    ----------
    coeff : (m, g) real array
    rhs : (m, n, n) Hermitian stack
    tol : float
        Feasibility tolerance on the minimum block eigenvalue of the
        affine-side iterate.
    max_iter : int
        Iteration budget; exhaustion gives status "budget".
    stall_window, stall_rel : stall detection for infeasibility evidence:
        the inter-set gap has stabilized above tolerance.
    """
    coeff = np.asarray(coeff, dtype=float)
    rhs = hermitize(np.asarray(rhs, dtype=complex))
    if coeff.ndim != 2 or rhs.ndim != 3 or coeff.shape[0] != rhs.shape[0]:
        raise NumericInputError(
            f"incompatible shapes coeff {coeff.shape}, rhs {rhs.shape}")
    if not np.all(np.isfinite(coeff)):
        raise NumericInputError("coefficient matrix contains non-finite entries")
    if tol <= 0 or max_iter < 1:
        raise InvalidParameterError("tol must be positive and max_iter >= 1")

    pinv = np.linalg.pinv(coeff, rcond=1e-12)

    def project_affine(q):
        gap_stack = np.einsum("kj,jab->kab", coeff, q) - rhs
        return q - np.einsum("jk,kab->jab", pinv, gap_stack)

    # Inconsistent system: the affine set is empty; the range residual is a
    # separating direction in constraint space.
    zero = np.zeros((coeff.shape[1], rhs.shape[1], rhs.shape[1]), dtype=complex)
    x = project_affine(zero)
    range_resid = np.einsum("kj,jab->kab", coeff, x) - rhs
    rr_norm = float(np.linalg.norm(range_resid))
    if rr_norm > 1e-10 * max(1.0, float(np.linalg.norm(rhs))):
        return FeasResult("infeasible_evidence", None, rr_norm, float("nan"), 0,
                          separator_space="constraint",
                          separator=-range_resid / rr_norm)

    corr = np.zeros_like(x)
    history = []
    gap = float("inf")
    for it in range(1, max_iter + 1):
        y, eigs = _psd_project_batch(x + corr)
        corr = x + corr - y
        x = project_affine(y)
        gap = float(np.linalg.norm(x - y))
        if it % 10 == 0 or it == 1:
            history.append((it, gap))
        min_eig = float(eigs.min())
        if gap <= tol:
            w = np.linalg.eigvalsh(x)
            min_eig_aff = float(w.min())
            if min_eig_aff >= -tol:
                return FeasResult("feasible", x, gap, min_eig_aff, it,
                                  gap_history=history)
        if it >= 2 * stall_window and it % stall_window == 0 and gap > 10 * tol:
            prev = [g for (i, g) in history if i <= it - stall_window]
            if prev and abs(prev[-1] - gap) <= stall_rel * max(gap, 1e-300):
                disp = x - y
                nrm = float(np.linalg.norm(disp))
                sep = disp / nrm if nrm > 0 else None
                return FeasResult("infeasible_evidence", None, gap, min_eig, it,
                                  separator_space="variable", separator=sep,
                                  gap_history=history)

    w = np.linalg.eigvalsh(x)
    return FeasResult("budget", x, gap, float(w.min()), max_iter,
                      gap_history=history)

# --- least-squares projection onto the image of a PSD product -------------------

@dataclass
class ImageProjResult:
    """Outcome of projecting a target stack onto {sum_j coeff[k,j] Q_j : Q_j PSD}.

    `blocks` are exactly PSD by construction (Q_j = Y_j Y_j*); `residual`
    is the final image-space distance ||sum_j coeff Q_j - rhs||_F, and
    `residual_stack` the corresponding displacement, which at a true
    minimum is normal to the image cone (usable as a separator candidate
    after independent validation).
    """

    blocks: np.ndarray
    residual: float
    residual_stack: np.ndarray
    iterations: int


def psd_image_project(coeff, rhs, start=None, max_iter=6000, tol=1e-10):
    """Certificate polish: factorized least squares min ||sum Q_j (x) g_j - rhs||.

    Parameterizes Q_j = Y_j Y_j* with square factors (so every second-order
    critical point of the squared distance is a global minimum) and runs
    Barzilai-Borwein gradient steps with an explosion guard.  Deterministic
    for a fixed start; default start is the PSD clip of the min-norm affine
    solution.
    """
    coeff = np.asarray(coeff, dtype=float)
    rhs = hermitize(np.asarray(rhs, dtype=complex))
    if coeff.ndim != 2 or rhs.ndim != 3 or coeff.shape[0] != rhs.shape[0]:
        raise NumericInputError(
            f"incompatible shapes coeff {coeff.shape}, rhs {rhs.shape}")
    g, n = coeff.shape[1], rhs.shape[1]
    if start is None:
        pinv = np.linalg.pinv(coeff, rcond=1e-12)
        start, _ = _psd_project_batch(np.einsum("jk,kab->jab", pinv, rhs))
    eigs, vecs = np.linalg.eigh(hermitize(np.asarray(start, dtype=complex)))
    y = vecs * np.sqrt(np.clip(eigs, 0.0, None))[:, None, :]

    def objective(yc):
        q = yc @ yc.conj().transpose(0, 2, 1)
        r = np.einsum("kj,jab->kab", coeff, q) - rhs
        return float(np.linalg.norm(r) ** 2), r, q

    f, resid, q = objective(y)
    best = (f, resid, q, 0)
    y_prev = grad_prev = None
    step = 1e-3
    it = 0
    for it in range(1, max_iter + 1):
        pulled = np.einsum("kj,kab->jab", coeff, resid)
        grad = 4.0 * np.einsum("jab,jbc->jac", pulled, y)
        if grad_prev is not None:
            dy = (y - y_prev).ravel()
            dg = (grad - grad_prev).ravel()
            den = float(np.vdot(dg, dg).real)
            if den > 1e-300:
                step = abs(float(np.vdot(dy, dg).real)) / den
        y_prev, grad_prev = y, grad
        y_trial = y - step * grad
        f_trial, r_trial, q_trial = objective(y_trial)
        if f_trial > 10.0 * f and step > 1e-14:
            step *= 0.25
            y_trial = y - step * grad
            f_trial, r_trial, q_trial = objective(y_trial)
        y, f, resid, q = y_trial, f_trial, r_trial, q_trial
        if f < best[0]:
            best = (f, resid, q, it)
        if f <= tol * tol:
            break
    f, resid, q, _ = best if best[0] < f else (f, resid, q, it)
    return ImageProjResult(hermitize(q), float(np.sqrt(f)), resid, it)
