"""Concrete quantum instances and the bridge back to the abstract cones.

SIC instances come from minimizing the off-diagonal fourth-power frame
potential over d^2 unit vectors; MUB instances for prime d come from the
Pauli eigenbases (d=2) or the exponential-sum bases (odd primes).  The map
pi sending each coordinate label to its concrete projection turns abstract
elements into Hermitian matrices; positivity of pi on the generator cone
and PSD replay of Inside-certificate ledgers are the package's soundness
anchors.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ._jsonutil import canonical_dumps, complex_matrix_from_json, complex_matrix_to_json
from .cones import (
    MembershipResult,
    SEP_TARGET_TOL,
    SeparatorCert,
    build_initial_cone,
    stack_value,
)
from .errors import (
    InvalidDimensionError,
    InvalidParameterError,
    NumericInputError,
    SearchFailed,
    UnsupportedDimensionError,
)
from .rng import generator as rng_generator
from .spaces import (
    MUB,
    SIC,
    HermLevel,
    VElement,
    XMinus,
    XPlus,
    YMinus,
    YPlus,
    _mub_label_index,
    hermitize,
)

OVERLAP_SUCCESS = 1e-6


# --- instances -----------------------------------------------------------------------

@dataclass
class SicInstance:
    d: int
    vectors: np.ndarray          # (d^2, d) unit vectors
    max_overlap_error: float
    meta: dict = field(default_factory=dict)

    @property
    def projections(self):
        v = self.vectors
        return np.einsum("ai,aj->aij", v, v.conj())

    @property
    def kind(self):
        return SIC

    def to_json_dict(self):
        return {"d": self.d, "kind": SIC,
                "vectors": [complex_matrix_to_json(v.reshape(1, -1)) for v in self.vectors],
                "meta": dict(self.meta, overlap_error=self.max_overlap_error)}


@dataclass
class MubInstance:
    d: int
    bases: np.ndarray            # (d+1, d, d); bases[x][a] is vector a of basis x
    max_overlap_error: float
    meta: dict = field(default_factory=dict)

    @property
    def projections(self):
        b = self.bases
        return np.einsum("xai,xaj->xaij", b, b.conj())

    @property
    def kind(self):
        return MUB

    def to_json_dict(self):
        return {"d": self.d, "kind": MUB,
                "vectors": [complex_matrix_to_json(basis) for basis in self.bases],
                "meta": dict(self.meta, overlap_error=self.max_overlap_error)}


def save_instance(instance, path):
    with open(path, "w") as fh:
        fh.write(canonical_dumps(instance.to_json_dict(), indent=2))
        fh.write("\n")


def load_instance(path_or_payload):
    """Load an instance from a JSON file path or an already-parsed payload."""
    if isinstance(path_or_payload, (str, bytes)):
        with open(path_or_payload) as fh:
            payload = json.load(fh)
    else:
        payload = path_or_payload
    d = int(payload["d"])
    kind = payload["kind"]
    meta = dict(payload.get("meta", {}))
    err = float(meta.pop("overlap_error", np.nan))
    if kind == SIC:
        vectors = np.stack([
            complex_matrix_from_json(row, (1, d))[0] for row in payload["vectors"]])
        inst = SicInstance(d, vectors, err, meta)
        if np.isnan(err):
            inst.max_overlap_error = _sic_overlap_error(vectors, d)
        return inst
    if kind == MUB:
        bases = np.stack([
            complex_matrix_from_json(rows, (d, d)) for rows in payload["vectors"]])
        inst = MubInstance(d, bases, err, meta)
        if np.isnan(err):
            inst.max_overlap_error = _mub_overlap_error(bases, d)
        return inst
    raise InvalidParameterError(f"unknown instance kind {kind!r}")


# --- SIC search ------------------------------------------------------------------------

def _sic_overlap_error(vectors, d):
    g = vectors.conj() @ vectors.T
    overlaps = np.abs(g) ** 2
    np.fill_diagonal(overlaps, 1.0 / (d + 1))
    return float(np.max(np.abs(overlaps - 1.0 / (d + 1))))


def _frame_potential(vectors):
    g = vectors.conj() @ vectors.T
    a = np.abs(g) ** 4
    np.fill_diagonal(a, 0.0)
    return float(a.sum()), g


def _overlap_polish(phi, d, max_iters=200):
    """Levenberg-Marquardt on the residuals {|G_ab|^2 - lam, |phi_a|^2 - 1}.

    The frame potential carries a constant term (its Welch-bound value), so
    float64 descent on it saturates near overlap error 1e-8, and the descent
    tail is quartically flat anyway; the residual system converges
    quadratically from within the equiangular basin.
    """
    lam = 1.0 / (d + 1)
    n = phi.shape[0]
    ia, ib = np.triu_indices(n, k=1)
    m = ia.size
    nv = 2 * n * d

    def residual(v):
        g = v.conj() @ v.T
        r = np.concatenate([
            np.abs(g[ia, ib]) ** 2 - lam,
            np.einsum("ak,ak->a", v.conj(), v).real - 1.0])
        return r, g

    def jacobian(v, g):
        jac = np.zeros((m + n, nv))
        gp = g[ia, ib]
        du = gp.conj()[:, None] * v[ib]
        dv = gp[:, None] * v[ia]
        cols = np.arange(d)
        for row in range(m):
            a, b = ia[row], ib[row]
            jac[row, a * 2 * d + cols] = 2 * du[row].real
            jac[row, a * 2 * d + d + cols] = 2 * du[row].imag
            jac[row, b * 2 * d + cols] = 2 * dv[row].real
            jac[row, b * 2 * d + d + cols] = 2 * dv[row].imag
        for a in range(n):
            jac[m + a, a * 2 * d + cols] = 2 * v[a].real
            jac[m + a, a * 2 * d + d + cols] = 2 * v[a].imag
        return jac

    def unpack(x):
        x = x.reshape(n, 2, d)
        return x[:, 0, :] + 1j * x[:, 1, :]

    x = np.concatenate(
        [phi.real[:, None, :], phi.imag[:, None, :]], axis=1).reshape(-1)
    r, g = residual(phi)
    val = float(r @ r)
    mu = 1e-6
    for _ in range(max_iters):
        v = unpack(x)
        jac = jacobian(v, g)
        try:
            delta = np.linalg.solve(jac.T @ jac + mu * np.eye(nv), -(jac.T @ r))
        except np.linalg.LinAlgError:
            mu *= 10.0
            continue
        xt = x + delta
        rt, gt = residual(unpack(xt))
        vt = float(rt @ rt)
        if vt < val:
            x, r, g, val = xt, rt, gt, vt
            mu = max(mu / 3.0, 1e-14)
            if np.max(np.abs(r)) < 1e-15:
                break
        else:
            mu *= 2.5
            if mu > 1e14:
                break
    v = unpack(x)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sic_search(d, restarts=20, max_iters=4000, seed=0):
    """Search for d^2 equiangular unit vectors in C^d.

    Projected gradient descent on the off-diagonal frame potential
    sum_{a != b} |<phi_a, phi_b>|^4 from Haar-random starts; steps start at
    0.05 and halve whenever the potential fails to decrease.  Success means
    every squared overlap sits within 1e-6 of 1/(d+1); if no restart gets
    there, SearchFailed carries the best instance found.
    """
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidDimensionError(f"sic search needs integer d >= 2, got {d!r}")
    if restarts < 1:
        raise InvalidParameterError("restarts must be >= 1")
    d = int(d)
    n = d * d
    best = None
    for restart in range(restarts):
        rng = rng_generator(seed, 0x51C, restart)
        phi = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
        phi /= np.linalg.norm(phi, axis=1, keepdims=True)
        pot, g = _frame_potential(phi)
        step = 0.05
        for _ in range(max_iters):
            weight = (np.abs(g) ** 2) * g
            np.fill_diagonal(weight, 0.0)
            grad = 4.0 * weight.conj() @ phi
            trial = phi - step * grad
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            pot_trial, g_trial = _frame_potential(trial)
            if pot_trial < pot:
                phi, pot, g = trial, pot_trial, g_trial
                step = min(0.05, step * 1.3)
                if _sic_overlap_error(phi, d) <= 1e-12:
                    break
            else:
                step *= 0.5
                if step < 1e-14:
                    break
        err = _sic_overlap_error(phi, d)
        if err <= 1e-3:
            phi = _overlap_polish(phi, d, max_iters)
            err = _sic_overlap_error(phi, d)
            pot, _ = _frame_potential(phi)
        inst = SicInstance(d, phi, err, {"seed": seed, "restart": restart,
                                         "frame_potential": pot})
        if best is None or err < best.max_overlap_error:
            best = inst
        if err <= OVERLAP_SUCCESS:
            return inst
    raise SearchFailed(
        f"no restart reached overlap error {OVERLAP_SUCCESS:g} for d={d} "
        f"(best {best.max_overlap_error:.3e})",
        instance=best, error=best.max_overlap_error)


# --- MUB generation ---------------------------------------------------------------------

def _is_prime(d):
    if d < 2:
        return False
    k = 2
    while k * k <= d:
        if d % k == 0:
            return False
        k += 1
    return True


def _mub_overlap_error(bases, d):
    worst = 0.0
    m = bases.shape[0]
    for x in range(m):
        for y in range(x + 1, m):
            g = np.abs(bases[x].conj() @ bases[y].T) ** 2
            worst = max(worst, float(np.max(np.abs(g - 1.0 / d))))
    return worst


def mub_generate(d):
    """d + 1 mutually unbiased bases for prime d.

    d = 2: the three Pauli eigenbases.  Odd prime d: the standard basis
    plus d exponential-sum bases with components omega^(x k^2 + a k)/sqrt(d).
    Composite d (including prime powers with exponent > 1) is unsupported.
    """
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidDimensionError(f"mub generation needs integer d >= 2, got {d!r}")
    d = int(d)
    if not _is_prime(d):
        raise UnsupportedDimensionError(
            f"d={d} is not prime; prime-power MUB constructions are out of scope")
    if d == 2:
        s = 1.0 / np.sqrt(2.0)
        bases = np.array([
            [[1.0, 0.0], [0.0, 1.0]],
            [[s, s], [s, -s]],
            [[s, 1j * s], [s, -1j * s]],
        ], dtype=complex)
    else:
        omega = np.exp(2j * np.pi / d)
        k = np.arange(d)
        bases = [np.eye(d, dtype=complex)]
        for x in range(1, d + 1):
            rows = [omega ** ((x * k * k + a * k) % d) / np.sqrt(d) for a in range(d)]
            bases.append(np.stack(rows))
        bases = np.stack(bases)
    err = _mub_overlap_error(bases, d)
    return MubInstance(d, bases, err, {"construction": "pauli" if d == 2 else
                                       "exponential_sum"})


# --- verification --------------------------------------------------------------------------

@dataclass
class VerificationReport:
    kind: str
    d: int
    ok: bool
    checks: dict

    def to_json_dict(self):
        return {"kind": self.kind, "d": self.d, "ok": self.ok, "checks": self.checks}


def _check_instance_shape(instance):
    d = instance.d
    if instance.kind == SIC:
        v = instance.vectors
        if v.shape != (d * d, d):
            raise NumericInputError(f"SIC vectors must be (d^2, d), got {v.shape}")
        norms = np.linalg.norm(v, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-8:
            raise NumericInputError("SIC vectors are not unit length at 1e-8")
    else:
        b = instance.bases
        if b.shape != (d + 1, d, d):
            raise NumericInputError(f"MUB bases must be (d+1, d, d), got {b.shape}")
        eye = np.eye(d)
        for x in range(d + 1):
            if np.linalg.norm(b[x].conj() @ b[x].T - eye) > 1e-8:
                raise NumericInputError(f"basis {x} is not orthonormal at 1e-8")
    if not np.all(np.isfinite(instance.vectors if instance.kind == SIC
                              else instance.bases)):
        raise NumericInputError("instance contains non-finite entries")


def verify_instance(instance, tol=1e-8):
    """Check the defining projection relations and normalized-trace values."""
    _check_instance_shape(instance)
    d = instance.d
    checks = {"max_overlap_error": instance.max_overlap_error}
    if instance.kind == SIC:
        lam = 1.0 / (d + 1)
        p = instance.projections
        checks["resolution_error"] = float(
            np.linalg.norm(p.sum(axis=0) - d * np.eye(d)))
        rel = 0.0
        trace_pair = 0.0
        for i in range(d * d):
            for j in range(d * d):
                if i == j:
                    continue
                pipj = p[i] @ p[j] @ p[i]
                rel = max(rel, float(np.linalg.norm(pipj - lam * p[i])))
                trace_pair = max(trace_pair, abs(
                    float(np.trace(p[i] @ p[j]).real) / d - lam / d))
        checks["relation_error"] = rel
        checks["trace_unit_error"] = float(
            np.max(np.abs(np.einsum("aii->a", p).real / d - 1.0 / d)))
        checks["trace_pair_error"] = trace_pair
        eigs = np.linalg.eigvalsh(p)
        target = np.zeros(d)
        target[-1] = 1.0
        checks["rank_one_error"] = float(np.max(np.abs(eigs - target)))
    else:
        mu = 1.0 / d
        p = instance.projections   # (d+1, d, d, d)
        res = 0.0
        for x in range(d + 1):
            res = max(res, float(np.linalg.norm(p[x].sum(axis=0) - np.eye(d))))
        checks["resolution_error"] = res
        rel = 0.0
        trace_triple = 0.0
        for x in range(d + 1):
            for y in range(d + 1):
                if x == y:
                    continue
                for a in range(d):
                    for b in range(d):
                        prod = p[x, a] @ p[y, b] @ p[x, a]
                        rel = max(rel, float(np.linalg.norm(prod - mu * p[x, a])))
                        trace_triple = max(trace_triple, abs(
                            float(np.trace(prod).real) / d - 1.0 / (d * d)))
        checks["relation_error"] = rel
        checks["trace_unit_error"] = float(
            np.max(np.abs(np.einsum("xaii->xa", p).real / d - 1.0 / d)))
        checks["trace_triple_error"] = trace_triple
        eigs = np.linalg.eigvalsh(p.reshape(-1, d, d))
        target = np.zeros(d)
        target[-1] = 1.0
        checks["rank_one_error"] = float(np.max(np.abs(eigs - target)))
    numeric = {k: v for k, v in checks.items() if k != "max_overlap_error"}
    ok = all(v <= tol for v in numeric.values())
    checks["tolerance"] = tol
    return VerificationReport(instance.kind, d, ok, checks)


# --- pi: abstract coordinates to concrete matrices -------------------------------------------

def pi_basis_images(space, instance):
    """(dim, d, d) stack of concrete images of the coordinate basis."""
    if space.kind != instance.kind or space.d != instance.d:
        raise InvalidParameterError("space and instance disagree on kind or d")
    d = space.d
    if space.kind == SIC:
        return instance.projections.astype(complex)
    images = np.empty((space.dim, d, d), dtype=complex)
    images[0] = np.eye(d)
    proj = instance.projections
    for i in range(1, d):
        for x in range(1, d + 2):
            slot = 1 + (i - 1) * (d + 1) + (x - 1)
            images[slot] = proj[x - 1, i - 1]
    return images


def pi_inflate(images, element):
    """Inflate an element through pi: level-n blocks A_k map to
    sum_k A_k (x) pi(b_k)."""
    if isinstance(element, VElement):
        return hermitize(np.einsum("k,kab->ab", element.coeffs, images))
    blocks = element.blocks
    n = element.n
    d = images.shape[1]
    out = np.zeros((n * d, n * d), dtype=complex)
    for k in range(images.shape[0]):
        out += np.kron(blocks[k], images[k])
    return hermitize(out)


# --- pi-positivity over the generator cone ----------------------------------------------------

@dataclass
class PiReport:
    kind: str
    d: int
    ok: bool
    min_margin: float
    violations: list
    rows: list

    def to_json_dict(self):
        return {"kind": self.kind, "d": self.d, "ok": self.ok,
                "min_margin": self.min_margin, "violations": self.violations,
                "rows": self.rows}

    def csv_rows(self):
        header = ["label", "min_eig", "n", "t_used", "t_min"]
        rows = [header]
        for r in self.rows:
            rows.append([r["label"], f"{r['min_eig']:.12e}",
                         r.get("n", ""), r.get("t_used", ""),
                         "" if r.get("t_min") is None else f"{r['t_min']:.9f}"])
        return rows


def _minimal_padding_t(base, pad, hi=1e6):
    """Smallest t >= 0 with base + t pad PSD (min-eig is nondecreasing in t)."""
    def min_eig(t):
        return float(np.linalg.eigvalsh(hermitize(base + t * pad))[0])
    if min_eig(0.0) >= -1e-12:
        return 0.0
    if min_eig(hi) < -1e-12:
        return None
    lo, up = 0.0, hi
    for _ in range(200):
        mid = 0.5 * (lo + up)
        if min_eig(mid) >= -1e-12:
            up = mid
        else:
            lo = mid
        if up - lo <= 1e-9 * max(1.0, up):
            break
    return up


def pi_positivity_check(space, instance, tseq, n_max, tol=1e-9):
    """Map every initial-cone generator through pi and check positivity.

    Reports per-generator minimum eigenvalues and, for the two-sided
    padding family, the minimal t making each image PSD next to the t the
    sequence actually used.
    """
    images = pi_basis_images(space, instance)
    cone = build_initial_cone(space, tseq, n_max)
    rows = []
    violations = []
    min_margin = float("inf")
    for gen, label, spec in zip(cone.generators, cone.labels, cone.specs):
        img = pi_inflate(images, gen)
        me = float(np.linalg.eigvalsh(img)[0])
        row = {"label": label, "min_eig": me}
        if isinstance(spec, (XPlus, XMinus, YPlus, YMinus)):
            row["n"] = spec.n
            row["t_used"] = spec.t
            base = pi_inflate(images, VElement(
                space, gen.coeffs - spec.t * _pad_coeffs(space, spec)))
            pad = pi_inflate(images, VElement(space, _pad_coeffs(space, spec)))
            row["t_min"] = _minimal_padding_t(base, pad)
        rows.append(row)
        min_margin = min(min_margin, me)
        if me < -tol:
            violations.append({"label": label, "min_eig": me})
    return PiReport(space.kind, space.d, not violations, min_margin,
                    violations, rows)


def _pad_coeffs(space, spec):
    if isinstance(spec, (XPlus, XMinus)):
        p = space.label_element(spec.j)
    else:
        p = space.label_element(_mub_label_index(space, spec.j, spec.y))
    return space.unit_coeffs - p.coeffs


# --- certificate-ledger soundness replay -----------------------------------------------------

@dataclass
class SoundnessReport:
    ok: bool
    checked: int
    violations: list
    warning: str | None = None

    def to_json_dict(self):
        return {"ok": self.ok, "checked": self.checked,
                "violations": self.violations, "warning": self.warning}


def soundness_check(iter_report, instance, tol_scale=1e-6):
    """Replay each Inside-certified ledger element through the inflated pi
    and check PSD within 1e-6 (1 + ||x||)."""
    space = iter_report.space
    images = pi_basis_images(space, instance)
    entries = list(iter_report.ledger)
    if not entries:
        return SoundnessReport(True, 0, [], warning="empty ledger: vacuous pass")
    violations = []
    for idx, entry in enumerate(entries):
        el = entry.element
        eps = entry.epsilon
        img = pi_inflate(images, el)
        n = 1 if isinstance(el, VElement) else el.n
        img = img + eps * np.eye(n * space.d)
        norm = float(np.linalg.norm(el.coeffs if isinstance(el, VElement)
                                    else el.blocks))
        me = float(np.linalg.eigvalsh(img)[0])
        if me < -tol_scale * (1.0 + norm):
            violations.append({"index": idx, "stage": getattr(entry, "stage", None),
                               "min_eig": me, "bound": -tol_scale * (1.0 + norm)})
    return SoundnessReport(not violations, len(entries), violations)


# --- concrete matrix-model oracle -------------------------------------------------------------

@dataclass
class EigWitness:
    """Inside witness in the concrete model: the inflated image's minimum
    eigenvalue cleared the tolerance."""
    min_eig: float
    level: int

    def to_json_dict(self):
        return {"type": "concrete_eig", "min_eig": self.min_eig, "level": self.level}


class MatrixModelOracle:
    """Membership oracle for the concrete operator cone {z : pi(z) >= 0}.

    Inside when the inflated image of z + eps unit is PSD within tol;
    otherwise Outside with the bottom-eigenvector functional
    f(z) = v* pi(z) v rendered as a coefficient-indexed stack (valid on the
    concrete cone by construction, and checked numerically on the target).
    """

    def __init__(self, space, instance, tol=1e-8):
        self.space = space
        self.instance = instance
        self.tol = tol
        self.images = pi_basis_images(space, instance)
        # Dual frame of the images under the trace pairing: the unique W with
        # Tr(W pi(z)) = f(z) for a stack F is sum_k F_k (x) dual_k.
        pair = np.einsum("kab,lba->kl", self.images, self.images).real
        self.dual_images = np.tensordot(np.linalg.inv(pair), self.images, axes=1)

    def _image(self, x, eps):
        if isinstance(x, VElement):
            x = x.to_level(1)
        img = pi_inflate(self.images, x)
        n = x.n
        return x, img + eps * np.eye(n * self.space.d)

    def pullback(self, matrix):
        """Level-n element whose inflated image is the given Hermitian
        nd x nd matrix (pi is a linear bijection onto Hermitian matrices)."""
        nd = matrix.shape[0]
        d = self.space.d
        if matrix.shape != (nd, nd) or nd % d:
            raise InvalidParameterError("matrix must be square with side n*d")
        n = nd // d
        y = hermitize(matrix).reshape(n, d, n, d)
        blocks = np.einsum("kde,resd->krs", self.dual_images, y)
        if n == 1:
            return VElement(self.space, blocks[:, 0, 0].real)
        return HermLevel(self.space, hermitize(blocks))

    def margin(self, x, eps=0.0):
        _, img = self._image(x, eps)
        return float(np.linalg.eigvalsh(img)[0])

    def separator_stack(self, x, vec):
        """Stack F with sum_k Tr(F_k A_k) = vec* pi(x-with-blocks-A) vec."""
        v = vec.reshape(x.n, self.space.d)
        m = np.einsum("rd,kde,se->krs", v.conj(), self.images, v)
        return hermitize(m.transpose(0, 2, 1))

    def __call__(self, x, eps):
        x, img = self._image(x, eps)
        eigs, vecs = np.linalg.eigh(img)
        me = float(eigs[0])
        if me >= -self.tol:
            return MembershipResult.inside(eps, EigWitness(me, x.n), min_eig=me)
        stack = self.separator_stack(x, vecs[:, 0])
        stack = stack / float(np.linalg.norm(stack))
        unit_stack = self.space.unit_coeffs[:, None, None] \
            * np.eye(x.n, dtype=complex)[None, :, :]
        validation = self.validate_stack(stack, x.blocks + eps * unit_stack)
        validation["form"] = "concrete_eigenvector"
        if not validation["ok"]:
            return MembershipResult.unknown(eps, min_eig=me,
                                            separator_validation=validation)
        cert = SeparatorCert("stack", stack, None, validation)
        return MembershipResult.outside(eps, cert, min_eig=me)

    def validate_stack(self, stack, target_blocks):
        """A stack functional is valid on the concrete cone exactly when its
        trace representer sum_k F_k (x) dual_k is PSD."""
        n = stack.shape[1]
        d = self.space.d
        rep = np.einsum("kab,kde->adbe", stack, self.dual_images)
        rep = hermitize(rep.reshape(n * d, n * d))
        min_gen = float(np.linalg.eigvalsh(rep)[0])
        target = stack_value(stack, target_blocks)
        return {"ok": bool(min_gen >= -1e-9 and target <= -SEP_TARGET_TOL),
                "min_generator_eig": min_gen, "target_value": target}

    def fold_starts(self, x, eps=0.0, count=4):
        """Bottom-eigenvector foldings of the inflated image, reshaped to
        compression candidates (n, d).

        For alpha = v.reshape(n, d) the compressed image satisfies
        vec(I)* pi(a* x a) vec(I) = v* pi(x) v, so a negative eigenvector
        folds into a compression witnessing the same negativity at level d.
        """
        if isinstance(x, VElement):
            x = x.to_level(1)
        _, img = self._image(x, eps)
        _, vecs = np.linalg.eigh(img)
        starts = []
        for c in range(min(count, vecs.shape[1])):
            v = vecs[:, c].reshape(x.n, self.space.d)
            starts.append(v / np.linalg.norm(v))
        return starts
