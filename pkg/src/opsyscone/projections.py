"""Abstract projection cones, relation checks, and d-minimality probes.

An element p with 0 <= p <= e acts as an abstract projection through the
level-2n lift [[x,x],[x,x]] + eps diag(I (x) p, I (x) p-perp)
+ t diag(I (x) p-perp, I (x) p): x is in the projection cone C_n(p) exactly
when some finite t makes the lift a member at level 2n.  The same
ask-for-a-padding-witness shape drives the abstract relation checks
p(x - tau e)p = 0 and, in the concrete model, reduces to the eigenvalue
statement T + eps P + t P-perp >= 0, which this module also provides as an
independent test oracle.

d-minimality is probed one-sidedly: a single compression alpha with
alpha* (x + eps I (x) e) alpha validly Outside at level d refutes
membership in the d-minimal cone; surviving a sample of compressions is
evidence, never proof.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .cones import (
    EPS_SCHEDULE,
    LiftCert,
    MembershipResult,
    SEP_TARGET_TOL,
    stack_value,
    _json_safe,
)
from .errors import InvalidParameterError, PreconditionError
from .numerics import herm_eig
from .rng import generator as rng_generator
from .spaces import HermLevel, VElement, compress, hermitize

PSD_WITNESS_TOL = 1e-10
# A separator refutes every padding level only when its value on the pad
# direction is zero within arithmetic noise; anything larger, scaled by the
# padding range, could flip the sign.
PAD_TOL = 1e-13
T_MAX_DEFAULT = float(2 ** 30)


# --- concrete compression lemma (test oracle) ---------------------------------------

@dataclass
class Witness:
    t: float
    min_eig: float

    def to_json_dict(self):
        return {"found": True, "t": self.t, "min_eig": self.min_eig}


@dataclass
class Refuted:
    t_max: float
    last_min_eig: float

    def to_json_dict(self):
        return {"found": False, "t_max": self.t_max, "last_min_eig": self.last_min_eig}


def lemma_compression_witness(P, T, eps, t_max=T_MAX_DEFAULT):
    """Doubling search for t with T + eps P + t P_perp >= 0 (concrete matrices).

    Returns the smallest power-of-two witness t, or Refuted when the grid
    up to t_max is exhausted.  Equivalent to positivity of the compression
    PTP on the range of P, which the tests check independently.
    """
    P = np.asarray(P, dtype=complex)
    T = np.asarray(T, dtype=complex)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape != T.shape:
        raise InvalidParameterError("P and T must be square matrices of equal size")
    if np.linalg.norm(P - P.conj().T) > 1e-10 or np.linalg.norm(P @ P - P) > 1e-10:
        raise InvalidParameterError("P is not a projection (P^2 = P = P* fails at 1e-10)")
    if np.linalg.norm(T - T.conj().T) > 1e-10:
        raise InvalidParameterError("T must be Hermitian")
    if eps <= 0 or not np.isfinite(eps):
        raise InvalidParameterError(f"eps must be positive, got {eps!r}")
    Pperp = np.eye(P.shape[0]) - P
    t = 1.0
    last = float("-inf")
    while t <= t_max:
        res = herm_eig(hermitize(T + eps * P + t * Pperp))
        last = float(res.eigenvalues[0])
        if last >= -PSD_WITNESS_TOL:
            return Witness(t, last)
        t *= 2.0
    return Refuted(float(t_max), last)


# --- lift construction ----------------------------------------------------------------

def projection_lift(x, p, eps, t):
    """Level-2n lift whose membership encodes x in C_n(p) at padding t."""
    space = x.space
    n = x.n
    pk = p.coeffs
    perp = space.unit_coeffs - pk
    two = 2 * n
    blocks = np.zeros((space.dim, two, two), dtype=complex)
    blocks[:, :n, :n] = x.blocks
    blocks[:, :n, n:] = x.blocks
    blocks[:, n:, :n] = x.blocks
    blocks[:, n:, n:] = x.blocks
    eye = np.eye(n)
    blocks[:, :n, :n] += (eps * pk + t * perp)[:, None, None] * eye
    blocks[:, n:, n:] += (eps * perp + t * pk)[:, None, None] * eye
    return HermLevel(space, blocks)


def projection_pad(space, p, n):
    """d/dt direction of the lift: diag(I_n (x) p_perp, I_n (x) p)."""
    pk = p.coeffs
    perp = space.unit_coeffs - pk
    two = 2 * n
    blocks = np.zeros((space.dim, two, two), dtype=complex)
    eye = np.eye(n)
    blocks[:, :n, :n] = perp[:, None, None] * eye
    blocks[:, n:, n:] = pk[:, None, None] * eye
    return HermLevel(space, blocks)


def _separator_pad_value(cert, pad_blocks):
    """Value of a separator on a pad direction, or None when the
    certificate's form cannot be evaluated against this direction."""
    pad = np.asarray(pad_blocks)
    if cert.form == "stack":
        if pad.ndim == 1 and cert.data.shape[1] == 1:
            pad = pad[:, None, None]
        if pad.shape != cert.data.shape:
            return None
        return stack_value(cert.data, pad)
    if cert.form == "gram_element":
        if pad.ndim != 1 or cert.dual.shape != pad.shape:
            return None
        return float(cert.dual @ pad)
    if cert.form == "compression":
        alpha = cert.data["alpha"]
        if pad.ndim != 3 or pad.shape[1] != alpha.shape[0]:
            return None
        compressed = np.matmul(alpha.conj().T[None], np.matmul(pad, alpha[None]))
        return _separator_pad_value(cert.data["inner"], compressed)
    return None


def _t_independent(cert, pad_value, t, t_max):
    """A validated separator refutes every padding level when its value on
    the pad direction vanishes within arithmetic noise; the linear bound
    over the whole grid is required as a belt."""
    if pad_value is None:
        return False
    target = cert.validation["target_value"]
    if pad_value > PAD_TOL:
        return False
    bound = target + max(0.0, pad_value) * t_max
    return bound <= -SEP_TARGET_TOL


def _row_corner_refute(oracle, target_blocks, pad_blocks, t, t_max):
    """Build a t-independent separator from the oracle's level-1 row duals.

    A row dual r is nonnegative on every generator, so r (x) w w* is a
    valid stack functional for any vector w.  Taking w from the bottom
    eigenvector of the row's target matrix, truncated to one corner of the
    2x2 lift structure, often kills the pad direction exactly (a label row
    pairs to zero with its own perp), which is what t-independence needs.
    """
    rows = getattr(oracle, "row_duals", None)
    validate = getattr(oracle, "validate_stack", None)
    prevalidated = bool(getattr(oracle, "rows_prevalidated", False))
    if rows is None or (validate is None and not prevalidated):
        return None
    rows = np.asarray(rows)
    if rows.ndim != 2 or rows.shape[0] == 0:
        return None
    two = target_blocks.shape[1]
    if two % 2:
        return None
    n = two // 2
    from .cones import SeparatorCert
    for r in rows:
        m = hermitize(np.einsum("k,kab->ab", r, target_blocks))
        eigs, vecs = np.linalg.eigh(m)
        if eigs[0] >= -SEP_TARGET_TOL:
            continue
        vec = vecs[:, 0]
        for corner in (slice(0, n), slice(n, two)):
            w = np.zeros_like(vec)
            w[corner] = vec[corner]
            nrm = float(np.linalg.norm(w))
            if nrm < 1e-6:
                continue
            w = w / nrm
            if float(np.real(w.conj() @ m @ w)) >= -SEP_TARGET_TOL:
                continue
            cand = r[:, None, None] * np.outer(w, w.conj())[None, :, :]
            cand = hermitize(cand / np.linalg.norm(cand))
            if validate is not None:
                validation = validate(cand, target_blocks)
                if not validation["ok"]:
                    continue
            else:
                tval = stack_value(cand, target_blocks)
                if tval > -SEP_TARGET_TOL:
                    continue
                validation = {"ok": True, "target_value": tval,
                              "prevalidated_rows": True}
            purified = SeparatorCert("stack", cand, None, validation)
            pv = stack_value(cand, pad_blocks)
            if _t_independent(purified, pv, t, t_max):
                validation["row_corner"] = True
                return purified, pv
    return None


def _rank_one_corner_purify(oracle, cert, target_blocks, pad_blocks, t, t_max):
    """Try to strip the pad-direction leakage from a (near) rank-one stack
    separator by truncating its vector to one corner of the 2x2 lift block
    structure, then revalidate.  Needs an oracle exposing validate_stack."""
    validate = getattr(oracle, "validate_stack", None)
    if validate is None or cert.form != "stack":
        return None
    stack = cert.data
    dim, two = stack.shape[0], stack.shape[1]
    if two % 2:
        return None
    n = two // 2
    flat = stack.reshape(dim, -1)
    u_l, sv, v_r = np.linalg.svd(flat, full_matrices=False)
    if sv[0] <= 0 or (sv.size > 1 and sv[1] > 1e-6 * sv[0]):
        return None
    s = u_l[:, 0] * sv[0]
    w_mat = hermitize(v_r[0].conj().reshape(two, two))
    eigs, vecs = np.linalg.eigh(w_mat)
    lead = int(np.argmax(np.abs(eigs)))
    if eigs[lead] < 0:
        s = -s
    vec = vecs[:, lead]
    for corner in (slice(0, n), slice(n, two)):
        trunc = np.zeros_like(vec)
        trunc[corner] = vec[corner]
        nrm = float(np.linalg.norm(trunc))
        if nrm < 1e-3:
            continue
        trunc = trunc / nrm
        cand = s[:, None, None] * np.outer(trunc, trunc.conj())[None, :, :]
        cand = hermitize(cand / np.linalg.norm(cand))
        validation = validate(cand, target_blocks)
        if not validation["ok"]:
            continue
        from .cones import SeparatorCert
        purified = SeparatorCert("stack", cand, None, validation)
        pv = stack_value(cand, pad_blocks)
        if _t_independent(purified, pv, t, t_max):
            validation["corner_purified"] = True
            return purified, pv
    return None


# --- abstract projection cone membership ------------------------------------------------

def _refuted_until(cert, pad_value, t):
    """Largest padding level the separator at grid point t still refutes.

    The lift is affine in t with derivative equal to the pad direction, so
    the separator's value at padding s is target + (s - t) * pad_value.  Any
    s below the zero crossing is decisively refuted by the certificate in
    hand, hence the search may skip past it without losing an Inside.
    """
    if pad_value is None or pad_value <= PAD_TOL:
        return None
    target = cert.validation["target_value"]
    if target >= -SEP_TARGET_TOL:
        return None
    return t + (-target - SEP_TARGET_TOL) / pad_value


def cnp_member(oracle_2n, x, p, eps, t_max=T_MAX_DEFAULT, oracle_1=None,
               unknown_patience=None, max_attempts=None):
    """Membership of x in the abstract projection cone C_n(p).

    Forms the level-2n lift and searches the padding by doubling through
    `oracle_2n`.  Inside at any t wins; Outside requires a validated
    separator whose value on the pad direction makes it conclusive for all
    remaining t; exhausting the grid is Unknown, never Outside.  When a
    separator refutes a whole prefix of the grid the search jumps past it,
    which skips only points already certified out.

    `unknown_patience` stops the search early after that many consecutive
    uninformative inner verdicts, and `max_attempts` caps the number of
    inner queries; both early exits report Unknown.  When `oracle_1` is
    given, the range condition 0 <= p <= e is checked first; a validated
    violation raises PreconditionError.
    """
    if eps <= 0 or not np.isfinite(eps):
        raise InvalidParameterError(f"eps must be positive, got {eps!r}")
    if isinstance(x, VElement):
        x = x.to_level(1)
    if p.space != x.space:
        raise InvalidParameterError("x and p live over different spaces")
    if oracle_1 is not None:
        unit = VElement(p.space, p.space.unit_coeffs.copy())
        for name, el in (("p", p), ("e - p", unit - p)):
            r = oracle_1(el, eps)
            if r.is_outside:
                raise PreconditionError(
                    f"{name} is outside the level-1 cone: 0 <= p <= e fails")

    space = x.space
    n = x.n
    pad = projection_pad(space, p, n)
    slack = eps * space.unit_coeffs[:, None, None] \
        * np.eye(2 * n, dtype=complex)[None, :, :]

    # Fast path: a row-corner separator with zero pad value refutes every
    # padding level at once, with no oracle query at all.
    first = projection_lift(x, p, eps, 1.0).blocks + slack
    hit = _row_corner_refute(oracle_2n, first, pad.blocks, 1.0, t_max)
    if hit is not None:
        cert, pv = hit
        return MembershipResult.outside(
            eps, cert, t_refuted_from=1.0, pad_value=pv, t_independent=True,
            fast_path="row_corner", attempts=[])

    attempts = []
    stopped = "grid_exhausted"
    unknown_streak = 0
    t = 1.0
    while t <= t_max:
        if max_attempts is not None and len(attempts) >= max_attempts:
            stopped = "attempt_budget"
            break
        lift = projection_lift(x, p, eps, t)
        r = oracle_2n(lift, eps)
        attempts.append({"t": t, "verdict": r.verdict})
        if r.is_inside:
            cert = LiftCert(p.coeffs.copy(), eps, t, r.certificate)
            return MembershipResult.inside(eps, cert, t_used=t, lift_level=2 * n,
                                           attempts=attempts)
        t_next = 2.0 * t
        if r.is_outside:
            unknown_streak = 0
            pv = _separator_pad_value(r.certificate, pad.blocks)
            attempts[-1]["pad_value"] = pv
            if _t_independent(r.certificate, pv, t, t_max):
                return MembershipResult.outside(
                    eps, r.certificate, t_refuted_from=t, pad_value=pv,
                    t_independent=True, attempts=attempts)
            target = lift.blocks + slack
            purified = _rank_one_corner_purify(oracle_2n, r.certificate,
                                               target, pad.blocks, t, t_max)
            if purified is not None:
                cert, pv = purified
                return MembershipResult.outside(
                    eps, cert, t_refuted_from=t, pad_value=pv,
                    t_independent=True, attempts=attempts)
            horizon = _refuted_until(r.certificate, pv, t)
            if horizon is not None and horizon > t_next:
                attempts[-1]["jumped_to"] = horizon
                t_next = horizon
        else:
            unknown_streak += 1
            if unknown_patience is not None and unknown_streak >= unknown_patience:
                stopped = "unknown_patience"
                break
        t = t_next
    return MembershipResult.unknown(eps, t_max=t_max, stopped=stopped,
                                    attempts=attempts)


# --- abstract relation checks -------------------------------------------------------------

@dataclass
class RelationVerdict:
    holds: str                      # "yes" | "no" | "unknown"
    witnesses: list = field(default_factory=list)
    refutation: dict | None = None
    details: list = field(default_factory=list)

    def to_json_dict(self):
        return {"holds": self.holds, "witnesses": _json_safe(self.witnesses),
                "refutation": _json_safe(self.refutation),
                "details": _json_safe(self.details)}


def relation_check(oracle_1, p, x, tau, schedule=EPS_SCHEDULE, t_max=T_MAX_DEFAULT,
                   unknown_patience=None):
    """Does p (x - tau e) p = 0 hold abstractly?

    For each scheduled eps and each sign, searches t by doubling so that
    sign (x - tau e) + eps p + t p_perp is Inside per the level-1 oracle.
    Yes needs witnesses for every eps and both signs; a validated
    t-independent refutation anywhere gives No; otherwise Unknown.  The
    same certificate-driven pruning as cnp_member applies: a separator
    refuting a prefix of the t grid lets the search jump past it, and
    `unknown_patience` consecutive uninformative verdicts abandon the
    current (eps, sign) pair.
    """
    space = p.space
    unit = VElement(space, space.unit_coeffs.copy())
    perp = unit - p
    base = x - tau * unit
    witnesses = []
    details = []
    all_witnessed = True
    for eps in sorted(schedule):
        for sign in (1.0, -1.0):
            found = None
            unknown_streak = 0
            t = 1.0
            while t <= t_max:
                el = sign * base + eps * p + t * perp
                r = oracle_1(el, eps)
                if r.is_inside:
                    found = t
                    break
                t_next = 2.0 * t
                if r.is_outside:
                    unknown_streak = 0
                    pv = _separator_pad_value(r.certificate, perp.coeffs)
                    if _t_independent(r.certificate, pv, t, t_max):
                        refutation = {"eps": eps, "sign": sign, "t": t,
                                      "pad_value": pv,
                                      "certificate": r.certificate.to_json_dict()}
                        details.append({"eps": eps, "sign": sign, "refuted_at_t": t})
                        return RelationVerdict("no", witnesses, refutation, details)
                    horizon = _refuted_until(r.certificate, pv, t)
                    if horizon is not None and horizon > t_next:
                        t_next = horizon
                else:
                    unknown_streak += 1
                    if unknown_patience is not None and unknown_streak >= unknown_patience:
                        break
                t = t_next
            details.append({"eps": eps, "sign": sign, "witness_t": found})
            if found is None:
                all_witnessed = False
            else:
                witnesses.append({"eps": eps, "sign": sign, "t": found})
    return RelationVerdict("yes" if all_witnessed else "unknown",
                           witnesses, None, details)


# --- d-minimality probes ----------------------------------------------------------------

@dataclass
class SearchBudget:
    restarts: int = 32
    steps: int = 200
    seed: int = 0
    step0: float = 0.5


@dataclass
class CompressionCert:
    """A compression alpha whose image is validly Outside at level d."""
    alpha: np.ndarray
    compressed: HermLevel
    violation: MembershipResult

    def to_json_dict(self):
        from ._jsonutil import complex_matrix_to_json
        return {"alpha": complex_matrix_to_json(self.alpha),
                "shape": list(self.alpha.shape),
                "compressed": self.compressed.to_json_dict(),
                "violation": self.violation.to_json_dict()}


@dataclass
class Refutation:
    certificate: CompressionCert
    evaluations: int

    def to_json_dict(self):
        return {"refuted": True, "evaluations": self.evaluations,
                "certificate": self.certificate.to_json_dict()}


@dataclass
class NoneFound:
    evaluations: int
    best_margin: float

    def to_json_dict(self):
        return {"refuted": False, "evaluations": self.evaluations,
                "best_margin": self.best_margin}


@dataclass
class SurvivedSamples:
    count: int

    def to_json_dict(self):
        return {"refuted": False, "survived": self.count}


def _slack_target(x, eps):
    blocks = x.blocks.copy()
    if eps:
        eye = np.eye(x.n, dtype=complex)
        blocks = blocks + eps * x.space.unit_coeffs[:, None, None] * eye[None, :, :]
    return HermLevel(x.space, blocks)


def _axis_compressions(n, d):
    """Coordinate-subset maps M_n -> M_d (identity on a chosen row set)."""
    out = []
    if n <= d:
        a = np.zeros((n, d), dtype=complex)
        a[:, :n] = np.eye(n)
        out.append(a)
        return out
    for rows in itertools.combinations(range(n), d):
        a = np.zeros((n, d), dtype=complex)
        for col, r in enumerate(rows):
            a[r, col] = 1.0
        out.append(a)
    return out


def _default_margin(result):
    diag = result.diagnostics
    for key in ("polish_residual", "residual", "dykstra_gap"):
        if key in diag:
            return -float(diag[key])
    if result.is_inside:
        return 0.0
    return -1.0


def _check_alpha(oracle_d, target, alpha, eps_inner, revalidate, count):
    alpha = alpha / float(np.linalg.norm(alpha))
    y = compress(target, alpha)
    r = oracle_d(y, eps_inner)
    count[0] += 1
    if r.is_outside and (revalidate is None or revalidate(y, r)):
        return CompressionCert(alpha, y, r), r
    return None, r


def dmin_refute(oracle_d, x, eps, search=None, margin_fn=None, eps_inner=None,
                extra_starts=(), revalidate=None):
    """Hunt for a compression refuting x + eps I_n (x) e from the d-minimal cone.

    Seeded random restarts with local descent on the Inside-margin of the
    compressed element; `margin_fn` (compressed HermLevel -> float) can
    supply a cheap surrogate, otherwise the oracle's own residual
    diagnostics steer the search.  Any validated Outside wins immediately.
    """
    search = search or SearchBudget()
    if eps < 0:
        raise InvalidParameterError("eps must be nonnegative")
    space = x.space
    n, d = x.n, space.d
    target = _slack_target(x, eps)
    if eps_inner is None:
        eps_inner = min(EPS_SCHEDULE)
    count = [0]
    best_margin = float("inf")

    def margin_of(alpha):
        nonlocal best_margin
        if margin_fn is not None:
            m = float(margin_fn(compress(target, alpha)))
            if m < -SEP_TARGET_TOL:
                cert, _ = _check_alpha(oracle_d, target, alpha, eps_inner,
                                       revalidate, count)
                if cert is not None:
                    return m, cert
            best_margin = min(best_margin, m)
            return m, None
        cert, r = _check_alpha(oracle_d, target, alpha, eps_inner, revalidate, count)
        m = _default_margin(r)
        best_margin = min(best_margin, m)
        return m, cert

    for alpha in list(_axis_compressions(n, d)) + list(extra_starts):
        m, cert = margin_of(alpha)
        if cert is not None:
            return Refutation(cert, count[0])

    for restart in range(search.restarts):
        rng = rng_generator(search.seed, 0xD41, restart)
        alpha = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
        alpha /= np.linalg.norm(alpha)
        m, cert = margin_of(alpha)
        if cert is not None:
            return Refutation(cert, count[0])
        sigma = search.step0
        for _ in range(search.steps):
            prop = alpha + sigma * (rng.standard_normal((n, d))
                                    + 1j * rng.standard_normal((n, d)))
            prop /= np.linalg.norm(prop)
            m2, cert = margin_of(prop)
            if cert is not None:
                return Refutation(cert, count[0])
            if m2 < m:
                alpha, m = prop, m2
                sigma = min(sigma * 1.2, 2.0)
            else:
                sigma *= 0.7
                if sigma < 1e-9:
                    break
    return NoneFound(count[0], best_margin)


def dmin_sampled_certify(oracle_d, x, eps, samples=500, seed=0, eps_inner=None,
                         revalidate=None):
    """One-sided d-minimality evidence: axis-aligned plus seeded random
    compressions; any validated failure refutes, survival is only evidence."""
    if samples < 0:
        raise InvalidParameterError("samples must be nonnegative")
    space = x.space
    n, d = x.n, space.d
    target = _slack_target(x, eps)
    if eps_inner is None:
        eps_inner = min(EPS_SCHEDULE)
    count = [0]
    for alpha in _axis_compressions(n, d):
        cert, _ = _check_alpha(oracle_d, target, alpha, eps_inner, revalidate, count)
        if cert is not None:
            return Refutation(cert, count[0])
    rng = rng_generator(seed, 0xD5A)
    for _ in range(samples):
        alpha = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
        alpha /= np.linalg.norm(alpha)
        cert, _ = _check_alpha(oracle_d, target, alpha, eps_inner, revalidate, count)
        if cert is not None:
            return Refutation(cert, count[0])
    return SurvivedSamples(count[0])
