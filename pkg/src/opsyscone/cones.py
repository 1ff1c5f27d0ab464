"""Generator cones and certificate-checked membership.

The initial cone at level 1 is generated by the basis projections (plus
their complements in the SIC case) together with the two-sided padding
family built from a strictly increasing t-sequence.  Membership at level 1
is a nonnegative least squares fit; membership at level n uses the maximal
tensor structure: x + eps I_n (x) e = sum_j Q_j (x) g_j with PSD Q_j,
decided by Dykstra alternating projections.

Verdicts are three-valued.  Inside always carries a certificate that
recombines to the target; Outside always carries a separating functional
validated against every generator; anything else is Unknown.  Solver
evidence alone never produces Outside.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._jsonutil import complex_matrix_to_json, real_vector_to_json
from .errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidParameterError,
)
from .numerics import (
    _psd_project_batch,
    dykstra_psd_feasibility,
    nnls,
    psd_image_project,
)
from .rng import generator as rng_generator
from .spaces import (
    MUB,
    SIC,
    BasisProj,
    BasisProjPerp,
    HermLevel,
    VElement,
    XMinus,
    XPlus,
    YMinus,
    YPlus,
    hermitize,
    make_generator,
    spec_label,
)

# Shared Archimedean slack schedule, evaluated ascending (tightest first);
# membership is monotone in eps so the first decisive verdict is strongest.
EPS_SCHEDULE = (1e-6, 1e-4, 1e-2)

SEP_GEN_TOL = 1e-9       # separators may dip this far below zero on generators
SEP_TARGET_TOL = 1e-7    # and must clear this margin on the target
RECOMBINE_TOL = 1e-7     # Inside certificates must recombine this tightly


class BudgetExhausted(Exception):
    """Internal control flow: a work budget ran out mid-query."""


class WorkBudget:
    """Deterministic call-count budget on base solver invocations."""

    def __init__(self, limit):
        self.limit = int(limit)
        self.spent = 0

    def charge(self, cost=1):
        self.spent += cost
        if self.spent > self.limit:
            raise BudgetExhausted(f"work budget of {self.limit} base calls exhausted")


# --- Gram data ------------------------------------------------------------------

@dataclass
class Gram:
    space: object
    matrix: np.ndarray
    rank: int

    def inner(self, u, v):
        return float(u @ self.matrix @ v)

    def to_json_dict(self):
        return {
            "space": self.space.to_json_dict(),
            "matrix": [real_vector_to_json(row) for row in self.matrix],
            "rank": self.rank,
        }


def gram_matrix(space):
    """Gram matrix of the coordinate basis under the canonical inner product.

    SIC kind: <p_i, p_j> = 1/d on the diagonal and lam/d off it.  MUB kind
    (basis {e} followed by independent p_i^x): <e, e> = 1, <e, p_i^x> = 1/d,
    <p_i^x, p_j^y> = 1/d when (i,x) = (j,y), 0 for distinct projections in
    the same basis, and mu/d = 1/d^2 across bases.
    """
    d = space.d
    if space.kind == SIC:
        g = np.full((space.dim, space.dim), space.constant / d)
        np.fill_diagonal(g, 1.0 / d)
    else:
        g = np.empty((space.dim, space.dim))
        g[0, 0] = 1.0
        g[0, 1:] = g[1:, 0] = 1.0 / d
        # basis index 1 + (i-1)(d+1) + (x-1) for i <= d-1
        x_of = np.array([(b - 1) % (d + 1) for b in range(1, space.dim)])
        same_x = x_of[:, None] == x_of[None, :]
        g[1:, 1:] = np.where(same_x, 0.0, 1.0 / (d * d))
        np.fill_diagonal(g[1:, 1:], 1.0 / d)
    eigs = np.linalg.eigvalsh(g)
    rank = int(np.sum(eigs > 1e-9))
    return Gram(space, g, rank)


# --- closed-form t thresholds (SIC) ----------------------------------------------

@dataclass
class Thresholds:
    d: int
    lam: float
    beta: float
    alpha_c: float
    gamma: float
    bound1: float
    bound2: float
    bound3: float
    t_star: float

    def to_json_dict(self):
        return {k: getattr(self, k) for k in
                ("d", "lam", "beta", "alpha_c", "gamma",
                 "bound1", "bound2", "bound3", "t_star")}


def t_thresholds(d):
    """Closed-form padding thresholds making all generator pairs nonnegative.

    Derived from the SIC Gram values; t_star = max of the three bounds is
    the smallest uniformly safe initial t.
    """
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidDimensionError(f"thresholds need integer d >= 2, got {d!r}")
    d = int(d)
    lam = 1.0 / (d + 1)
    beta = np.sqrt((lam * lam * d - 2 * lam + 2) / d)
    alpha_c = (d - 2 + lam) / d
    gamma = np.sqrt(d - 1) * beta / np.sqrt(d)
    bound1 = np.sqrt(d) * beta / (1 - lam)
    bound2 = np.sqrt(d * d - d) * beta / (d - 2 + lam)
    bound3 = (2 * gamma + np.sqrt(4 * gamma * gamma + 4 * alpha_c * beta * beta)) / (2 * alpha_c)
    t_star = max(bound1, bound2, bound3)
    return Thresholds(d, lam, float(beta), float(alpha_c), float(gamma),
                      float(bound1), float(bound2), float(bound3), float(t_star))


# --- t sequences -----------------------------------------------------------------

@dataclass(frozen=True)
class TSequence:
    """Strictly increasing positive padding sequence t_1 < t_2 < ...

    Rules: affine t_n = t0 + slope (n-1); geometric t_n = t0 ratio^(n-1);
    explicit lists are extended affinely past their end using the last
    difference.
    """

    rule: str
    params: tuple

    @classmethod
    def affine(cls, t0, slope):
        t0, slope = float(t0), float(slope)
        if t0 <= 0 or slope <= 0:
            raise InvalidParameterError("affine t-sequence needs t0 > 0 and slope > 0")
        return cls("affine", (t0, slope))

    @classmethod
    def geometric(cls, t0, ratio):
        t0, ratio = float(t0), float(ratio)
        if t0 <= 0 or ratio <= 1:
            raise InvalidParameterError("geometric t-sequence needs t0 > 0 and ratio > 1")
        return cls("geometric", (t0, ratio))

    @classmethod
    def explicit(cls, values):
        vals = tuple(float(v) for v in values)
        if not vals or vals[0] <= 0 or any(b <= a for a, b in zip(vals, vals[1:])):
            raise InvalidParameterError(
                "explicit t-sequence must be nonempty, positive, strictly increasing")
        return cls("explicit", vals)

    def value(self, n):
        if n < 1:
            raise InvalidParameterError("t-sequence index starts at 1")
        if self.rule == "affine":
            t0, slope = self.params
            return t0 + slope * (n - 1)
        if self.rule == "geometric":
            t0, ratio = self.params
            return t0 * ratio ** (n - 1)
        vals = self.params
        if n <= len(vals):
            return vals[n - 1]
        slope = vals[-1] - vals[-2] if len(vals) > 1 else 1.0
        return vals[-1] + slope * (n - len(vals))

    def to_json_dict(self):
        return {"rule": self.rule, "params": list(self.params)}

    @classmethod
    def from_json_dict(cls, payload):
        rule = payload["rule"]
        if rule == "affine":
            return cls.affine(*payload["params"])
        if rule == "geometric":
            return cls.geometric(*payload["params"])
        if rule == "explicit":
            return cls.explicit(payload["params"])
        raise InvalidParameterError(f"unknown t-sequence rule {rule!r}")


# --- generator cone ---------------------------------------------------------------

class GeneratorCone:
    """Finitely generated level-1 cone with its Archimedean unit."""

    def __init__(self, space, generators, labels, specs, tseq=None, n_max=0, level=1):
        if len(generators) != len(labels) or len(generators) != len(specs):
            raise DimensionMismatchError("generators, labels and specs must align")
        self.space = space
        self.level = level
        self.generators = tuple(generators)
        self.labels = tuple(labels)
        self.specs = tuple(specs)
        self.tseq = tseq
        self.n_max = n_max

    @property
    def archimedean_unit(self):
        return self.space.unit()

    def __len__(self):
        return len(self.generators)

    @cached_property
    def matrix(self):
        """(dim, g) generator coefficient columns."""
        return np.stack([g.coeffs for g in self.generators], axis=1)

    @cached_property
    def gram(self):
        return gram_matrix(self.space)

    @cached_property
    def _rows(self):
        """Normalized basis-row + unit-row functionals with generator values.

        Row functionals f(v) = dual . v, dual a row of the Gram matrix (the
        functional <b_r, .>) or the unit functional <e, .>.  Only rows that
        are nonnegative on every generator are usable as separators.
        """
        g = self.gram.matrix
        duals = np.vstack([g, self.space.unit_coeffs @ g])
        norms = np.linalg.norm(duals, axis=1)
        duals = duals / norms[:, None]
        vals = duals @ self.matrix
        valid = vals.min(axis=1) >= -SEP_GEN_TOL
        return duals, vals, valid

    def row_functionals(self):
        duals, vals, valid = self._rows
        return duals[valid], vals[valid]

    @cached_property
    def unit_row(self):
        """(dual, generator values) for the normalized unit functional <e, .>."""
        duals, vals, _ = self._rows
        return duals[-1], vals[-1]

    def augmented(self, extra_elements, extra_labels=None):
        """New cone with raw planted generators appended (used by probes/tests)."""
        labels = list(self.labels)
        specs = list(self.specs)
        gens = list(self.generators)
        for idx, el in enumerate(extra_elements):
            if not isinstance(el, VElement):
                el = VElement(self.space, np.asarray(el, dtype=float))
            gens.append(el)
            labels.append(extra_labels[idx] if extra_labels else f"planted[{idx + 1}]")
            specs.append(None)
        return GeneratorCone(self.space, gens, labels, specs, self.tseq, self.n_max)

    def to_json_dict(self):
        return {
            "space": self.space.to_json_dict(),
            "level": self.level,
            "tseq": self.tseq.to_json_dict() if self.tseq else None,
            "n_max": self.n_max,
            "generator_count": len(self.generators),
        }


def build_initial_cone(space, tseq, n_max):
    """Initial level-1 cone for a space and padding sequence.

    SIC kind: all p_k and their complements, plus x+-(i, j, n) for i != j
    and n <= n_max.  MUB kind: all projection labels p_i^x plus
    y+-(x, i, y, j, n) for x != y and n <= n_max.  Duplicate coefficient
    vectors are dropped.
    """
    if not isinstance(n_max, (int, np.integer)) or n_max < 1:
        raise InvalidParameterError(f"n_max must be a positive integer, got {n_max!r}")
    if not isinstance(tseq, TSequence):
        raise InvalidParameterError("tseq must be a TSequence")
    specs = []
    if space.kind == SIC:
        specs.extend(BasisProj(k) for k in range(1, space.n_labels + 1))
        specs.extend(BasisProjPerp(k) for k in range(1, space.n_labels + 1))
        for n in range(1, n_max + 1):
            t = tseq.value(n)
            for i in range(1, space.n_labels + 1):
                for j in range(1, space.n_labels + 1):
                    if i == j:
                        continue
                    specs.append(XPlus(i, j, n, t))
                    specs.append(XMinus(i, j, n, t))
    elif space.kind == MUB:
        specs.extend(BasisProj(k) for k in range(1, space.n_labels + 1))
        d = space.d
        for n in range(1, n_max + 1):
            t = tseq.value(n)
            for x in range(1, d + 2):
                for y in range(1, d + 2):
                    if x == y:
                        continue
                    for i in range(1, d + 1):
                        for j in range(1, d + 1):
                            specs.append(YPlus(x, i, y, j, n, t))
                            specs.append(YMinus(x, i, y, j, n, t))
    else:
        raise InvalidParameterError(f"unknown space kind {space.kind!r}")

    gens, labels, kept_specs, seen = [], [], [], set()
    for sp in specs:
        el = make_generator(space, sp)
        key = el.coeffs.tobytes()
        if key in seen:
            continue
        seen.add(key)
        gens.append(el)
        labels.append(spec_label(sp))
        kept_specs.append(sp)
    return GeneratorCone(space, gens, labels, kept_specs, tseq, int(n_max))


# --- certificates and results ------------------------------------------------------

@dataclass
class ConeCoeffs:
    """Nonnegative recombination over the cone's generator list."""
    coeffs: np.ndarray
    residual: float

    def to_json_dict(self):
        return {"type": "cone_coeffs", "coeffs": real_vector_to_json(self.coeffs),
                "residual": self.residual}


@dataclass
class OmaxBlocks:
    """PSD blocks Q_j with sum_j Q_j (x) g_j = x + eps I_n (x) e."""
    blocks: np.ndarray
    residual: float

    def to_json_dict(self):
        return {"type": "omax_blocks",
                "blocks": [complex_matrix_to_json(b) for b in self.blocks],
                "n": int(self.blocks.shape[1]), "residual": self.residual}


@dataclass
class SeparatorCert:
    """Validated separating functional.

    form "gram_element": level-1 functional <w, .> in the Gram inner
    product; `dual` holds the plain dual vector so f(v) = dual . v.
    form "stack": level-n functional f(x) = sum_k Tr(F_k A_k).
    form "compression": f(x) = g(alpha* x alpha) for a validated inner
    separator g at the compressed level; `data` is {"alpha", "inner"}.
    """
    form: str
    data: object
    dual: np.ndarray | None
    validation: dict

    def to_json_dict(self):
        out = {"type": "separator", "form": self.form, "validation": self.validation}
        if self.form == "gram_element":
            out["w"] = real_vector_to_json(self.data)
            out["dual"] = real_vector_to_json(self.dual)
        elif self.form == "compression":
            out["alpha"] = complex_matrix_to_json(self.data["alpha"])
            out["rows"] = int(self.data["alpha"].shape[0])
            out["inner"] = self.data["inner"].to_json_dict()
        else:
            out["stack"] = [complex_matrix_to_json(b) for b in self.data]
            out["n"] = int(self.data.shape[1])
        return out


@dataclass
class LiftCert:
    """Inside witness for a projection-compression query: the padded lift
    at level 2n is a member of the lower cone at the recorded t."""
    p_coeffs: np.ndarray
    eps: float
    t: float
    inner: object

    def to_json_dict(self):
        return {"type": "lift", "p": real_vector_to_json(self.p_coeffs),
                "eps": self.eps, "t": self.t,
                "inner": cert_to_json(self.inner)}


def cert_to_json(cert):
    return None if cert is None else cert.to_json_dict()


@dataclass
class MembershipResult:
    verdict: str                 # "inside" | "outside" | "unknown"
    epsilon: float
    certificate: object | None = None
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def inside(cls, eps, certificate, **diag):
        return cls("inside", float(eps), certificate, dict(diag))

    @classmethod
    def outside(cls, eps, certificate, **diag):
        # Outside verdicts require a validated separator, never solver
        # evidence alone.
        if not isinstance(certificate, SeparatorCert) or not certificate.validation.get("ok"):
            raise InvalidParameterError("outside verdicts require a validated separator")
        return cls("outside", float(eps), certificate, dict(diag))

    @classmethod
    def unknown(cls, eps, **diag):
        return cls("unknown", float(eps), None, dict(diag))

    @property
    def is_inside(self):
        return self.verdict == "inside"

    @property
    def is_outside(self):
        return self.verdict == "outside"

    def to_json_dict(self):
        return {"verdict": self.verdict, "epsilon": self.epsilon,
                "certificate": cert_to_json(self.certificate),
                "diagnostics": _json_safe(self.diagnostics)}


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    return obj


# --- functional evaluation and validation -------------------------------------------

def stack_value(stack, blocks):
    """f(x) = sum_k Tr(F_k A_k) for Hermitian stacks (real by symmetry)."""
    return float(np.real(np.einsum("kab,kba->", stack, blocks)))


def validate_stack_separator(cone, stack, target_blocks):
    """Check a level-n stack functional against every generator and the target."""
    per_gen = np.einsum("kj,kab->jab", cone.matrix, stack)
    gen_eigs = np.linalg.eigvalsh(hermitize(per_gen))
    min_gen = float(gen_eigs.min())
    target = stack_value(stack, target_blocks)
    ok = bool(min_gen >= -SEP_GEN_TOL and target <= -SEP_TARGET_TOL)
    return {"ok": ok, "min_generator_eig": min_gen, "target_value": target}


def validate_vector_separator(cone, dual, target):
    vals = dual @ cone.matrix
    min_gen = float(vals.min())
    tval = float(dual @ target)
    ok = bool(min_gen >= -SEP_GEN_TOL and tval <= -SEP_TARGET_TOL)
    return {"ok": ok, "min_generator_value": min_gen, "target_value": tval}


# --- level-1 membership ---------------------------------------------------------------

def lp_member(cone, y, eps, work=None):
    """Level-1 membership of y + eps e in the generated cone.

    A successful nonnegative fit gives Inside with recombination
    coefficients; otherwise the least-squares dual direction is tried as a
    separator and validated against the Gram inner product.
    """
    if eps <= 0 or not np.isfinite(eps):
        raise InvalidParameterError(f"eps must be positive, got {eps!r}")
    if isinstance(y, HermLevel):
        y = y.to_velement()
    if y.space != cone.space:
        raise DimensionMismatchError("element and cone live over different spaces")
    if work is not None:
        work.charge()

    b = y.coeffs + eps * cone.space.unit_coeffs
    fit = nnls(cone.matrix, b)
    diag = {"residual": fit.residual, "nnls_iterations": fit.iterations}
    if fit.residual <= 1e-9 * (1.0 + np.linalg.norm(b)):
        recomb = float(np.linalg.norm(cone.matrix @ fit.coeffs - b))
        if recomb <= RECOMBINE_TOL:
            return MembershipResult.inside(
                eps, ConeCoeffs(fit.coeffs, fit.residual), **diag)
        return MembershipResult.unknown(eps, recombination_error=recomb, **diag)

    # Row functionals are pre-validated on all generators and vanish exactly
    # on basis perps, making them the strongest Outside witnesses.
    duals, _ = cone.row_functionals()
    if duals.shape[0]:
        row_vals = duals @ b
        worst = int(np.argmin(row_vals))
        if row_vals[worst] <= -SEP_TARGET_TOL:
            dual = duals[worst]
            validation = validate_vector_separator(cone, dual, b)
            if validation["ok"]:
                validation["row"] = worst
                w = np.linalg.solve(cone.gram.matrix, dual)
                return MembershipResult.outside(
                    eps, SeparatorCert("gram_element", w, dual, validation),
                    method="row_functional", **diag)

    resid_vec = b - cone.matrix @ fit.coeffs
    nrm = float(np.linalg.norm(resid_vec))
    if nrm >= SEP_TARGET_TOL:
        dual = -resid_vec / nrm
        validation = validate_vector_separator(cone, dual, b)
        if validation["ok"]:
            w = np.linalg.solve(cone.gram.matrix, dual)
            return MembershipResult.outside(
                eps, SeparatorCert("gram_element", w, dual, validation),
                method="residual_dual", **diag)
        diag["separator_validation"] = validation
    return MembershipResult.unknown(eps, **diag)


# --- level-n membership (maximal tensor structure) --------------------------------------

def _unit_stack(space, n):
    return space.unit_coeffs[:, None, None] * np.eye(n, dtype=complex)[None, :, :]


def _rank_one_scan(cone, target_blocks, eps):
    """Cheap Outside search over row functionals composed with compressions.

    For each valid row functional s, the moment matrix Y = sum_k s_k T_k
    satisfies w* Y w = s(w* T w); a negative eigenpair lifts to the
    validated rank-one separator F_k = s_k w w*.
    """
    duals, vals = cone.row_functionals()
    if duals.shape[0] == 0:
        return None
    moments = hermitize(np.einsum("rk,kab->rab", duals, target_blocks))
    eigvals, eigvecs = np.linalg.eigh(moments)
    worst = np.argmin(eigvals[:, 0])
    if eigvals[worst, 0] >= -SEP_TARGET_TOL:
        return None
    w = eigvecs[worst][:, 0]
    stack = duals[worst][:, None, None] * np.outer(w, w.conj())[None, :, :]
    stack = hermitize(stack / np.linalg.norm(stack))
    validation = validate_stack_separator(cone, stack, target_blocks)
    if not validation["ok"]:
        return None
    validation["row"] = int(worst)
    return MembershipResult.outside(eps, SeparatorCert("stack", stack, None, validation),
                                    method="rank_one_row_scan")


def _unit_shifted(cone, stack, validation, target_blocks, n):
    """Absorb slightly negative generator eigenvalues of a separator by
    shifting along the unit functional, which is strictly positive on all
    generators at sane t."""
    e_dual, e_vals = cone.unit_row
    rho = float(e_vals.min())
    min_gen = validation["min_generator_eig"]
    if rho <= 1e-12 or not -1e-5 < min_gen < 0:
        return None
    delta = -min_gen * 1.25 / rho
    shifted = stack + delta * e_dual[:, None, None] * np.eye(n)[None, :, :]
    shifted = hermitize(shifted / np.linalg.norm(shifted))
    check = validate_stack_separator(cone, shifted, target_blocks)
    if check["ok"]:
        check["unit_shift"] = delta
        return shifted, check
    return None


def omax_member(cone, x, eps, tol=1e-8, dykstra_iter=2500, work=None,
                polish_iters=6000):
    """Membership of x + eps I_n (x) e in the level-n maximal cone over the
    level-1 generator cone.

    Pipeline: rank-one row-functional scan (cheap validated Outside), then
    Dykstra alternating projections, then a factorized least-squares polish
    that either rounds the iterate to an exactly-PSD certificate or yields
    the projection residual as a separator candidate.  Every Outside passes
    the independent validator; everything undecided is Unknown.
    """
    if eps <= 0 or not np.isfinite(eps):
        raise InvalidParameterError(f"eps must be positive, got {eps!r}")
    if isinstance(x, VElement):
        x = x.to_level(1)
    if x.space != cone.space:
        raise DimensionMismatchError("element and cone live over different spaces")
    n = x.n
    target = x.blocks + eps * _unit_stack(cone.space, n)

    hit = _rank_one_scan(cone, target, eps)
    if hit is not None:
        return hit

    # Iterative solves dominate cost quadratically in the level.
    if work is not None:
        work.charge(n * n)
    feas = dykstra_psd_feasibility(cone.matrix, target, tol=tol, max_iter=dykstra_iter)
    diag = {"dykstra_status": feas.status, "dykstra_gap": feas.gap,
            "dykstra_iterations": feas.iterations}
    if feas.status == "feasible":
        blocks, _ = _psd_project_batch(feas.point)
        recomb = float(np.linalg.norm(
            np.einsum("kj,jab->kab", cone.matrix, blocks) - target))
        if recomb <= RECOMBINE_TOL:
            return MembershipResult.inside(eps, OmaxBlocks(blocks, recomb), **diag)

    if feas.separator_space == "constraint" and feas.separator is not None:
        stack = hermitize(feas.separator)
        validation = validate_stack_separator(cone, stack, target)
        if validation["ok"]:
            return MembershipResult.outside(
                eps, SeparatorCert("stack", stack, None, validation),
                method="range_residual", **diag)

    start = None
    if feas.point is not None:
        start, _ = _psd_project_batch(feas.point)
    proj = psd_image_project(cone.matrix, target, start=start, max_iter=polish_iters)
    diag["polish_residual"] = proj.residual
    diag["polish_iterations"] = proj.iterations
    if proj.residual <= 0.5 * RECOMBINE_TOL:
        return MembershipResult.inside(
            eps, OmaxBlocks(proj.blocks, proj.residual), method="polished", **diag)
    if proj.residual >= 10 * SEP_TARGET_TOL:
        stack = hermitize(proj.residual_stack / np.linalg.norm(proj.residual_stack))
        validation = validate_stack_separator(cone, stack, target)
        if validation["ok"]:
            return MembershipResult.outside(
                eps, SeparatorCert("stack", stack, None, validation),
                method="polished_projection", **diag)
        shifted = _unit_shifted(cone, stack, validation, target, n)
        if shifted is not None:
            stack, validation = shifted
            return MembershipResult.outside(
                eps, SeparatorCert("stack", stack, None, validation),
                method="polished_projection_shifted", **diag)
        diag["separator_validation"] = validation
    return MembershipResult.unknown(eps, **diag)


class ConeOracle:
    """Callable membership oracle bound to a generator cone.

    Dispatches level-1 queries to the nonnegative fit and higher levels to
    the maximal tensor machinery, and exposes the separator validator so
    downstream layers (projection cones, d-minimality probes) can
    revalidate or improve certificates independently.
    """

    # row functionals below are validated against the generators at build time
    rows_prevalidated = True

    def __init__(self, cone, work=None):
        self.cone = cone
        self.space = cone.space
        self.work = work

    def __call__(self, x, eps):
        if isinstance(x, VElement) or x.n == 1:
            el = x if isinstance(x, VElement) else x.to_velement()
            return lp_member(self.cone, el, eps, work=self.work)
        return omax_member(self.cone, x, eps, work=self.work)

    @property
    def row_duals(self):
        return self.cone.row_functionals()[0]

    def validate_stack(self, stack, target_blocks):
        return validate_stack_separator(self.cone, stack, target_blocks)

    def validate_vector(self, dual, target):
        return validate_vector_separator(self.cone, dual, target)


# --- certificate re-evaluation ------------------------------------------------------

def reevaluate_certificate(cone, element, result):
    """Recompute an Inside certificate's recombination error with plain
    coefficient arithmetic (no solver involvement)."""
    cert = result.certificate
    if cert is None:
        return None
    if isinstance(cert, ConeCoeffs):
        y = element.to_velement() if isinstance(element, HermLevel) else element
        b = y.coeffs + result.epsilon * cone.space.unit_coeffs
        if np.any(cert.coeffs < -1e-12):
            return float("inf")
        return float(np.linalg.norm(cone.matrix @ cert.coeffs - b))
    if isinstance(cert, OmaxBlocks):
        x = element.to_level(1) if isinstance(element, VElement) else element
        target = x.blocks + result.epsilon * _unit_stack(cone.space, x.n)
        if float(np.linalg.eigvalsh(cert.blocks).min()) < -SEP_GEN_TOL:
            return float("inf")
        return float(np.linalg.norm(
            np.einsum("kj,jab->kab", cone.matrix, cert.blocks) - target))
    if isinstance(cert, LiftCert):
        from .projections import projection_lift
        x = element.to_level(1) if isinstance(element, VElement) else element
        p = VElement(cone.space, cert.p_coeffs)
        lifted = projection_lift(x, p, cert.eps, cert.t)
        inner = MembershipResult("inside", result.epsilon, cert.inner, {})
        return reevaluate_certificate(cone, lifted, inner)
    return None


# --- schedule wrapper ------------------------------------------------------------------

def schedule_member(query, schedule=EPS_SCHEDULE):
    """Walk the eps schedule ascending; return the first decisive verdict.

    `query` maps eps to a MembershipResult.  All-Unknown collapses to a
    single Unknown at the tightest eps.
    """
    results = []
    for eps in sorted(schedule):
        r = query(eps)
        if r.verdict != "unknown":
            return r
        results.append(r)
    out = results[0]
    out.diagnostics["schedule_exhausted"] = True
    return out


# --- properness probe --------------------------------------------------------------------

@dataclass
class ProbeBudget:
    directions: int = 2000
    ascent_steps: int = 6000
    eps: float = 1e-6
    seed: int = 0
    step0: float = 0.25


@dataclass
class ProbeResult:
    found: bool
    direction: object | None
    result_plus: MembershipResult | None
    result_minus: MembershipResult | None
    probes_used: int

    def to_json_dict(self):
        return {
            "found": self.found,
            "direction": self.direction.to_json_dict() if self.direction is not None else None,
            "result_plus": self.result_plus.to_json_dict() if self.result_plus else None,
            "result_minus": self.result_minus.to_json_dict() if self.result_minus else None,
            "probes_used": self.probes_used,
        }


def _herm_basis(n):
    units = []
    for r in range(n):
        m = np.zeros((n, n), dtype=complex)
        m[r, r] = 1.0
        units.append(m)
    inv = 1.0 / np.sqrt(2.0)
    for r in range(n):
        for s in range(r + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[r, s] = m[s, r] = inv
            units.append(m)
            m = np.zeros((n, n), dtype=complex)
            m[r, s] = 1j * inv
            m[s, r] = -1j * inv
            units.append(m)
    return units


def _probe_directions(space, level, count, seed):
    """All basis directions first, then seeded random unit directions."""
    dirs = []
    if level == 1:
        for k in range(space.dim):
            v = np.zeros(space.dim)
            v[k] = 1.0
            dirs.append(VElement(space, v))
    else:
        for h in _herm_basis(level):
            for k in range(space.dim):
                blocks = np.zeros((space.dim, level, level), dtype=complex)
                blocks[k] = h
                dirs.append(HermLevel(space, blocks))
    rng = rng_generator(seed, 0x9A, level)
    for _ in range(count):
        if level == 1:
            v = rng.standard_normal(space.dim)
            dirs.append(VElement(space, v / np.linalg.norm(v)))
        else:
            raw = rng.standard_normal((space.dim, level, level)) \
                + 1j * rng.standard_normal((space.dim, level, level))
            blocks = hermitize(raw)
            blocks /= np.linalg.norm(blocks)
            dirs.append(HermLevel(space, blocks))
    return dirs


def _margin(result):
    if "residual" in result.diagnostics:
        return -float(result.diagnostics["residual"])
    if result.is_inside:
        return 0.0
    return -1.0


def properness_probe(member, space, level=1, budget=None, threads=None,
                     candidates=()):
    """Hunt for a unit direction y with both +-y Inside (a lineality line).

    Scans all basis directions plus seeded random ones, then runs a pattern
    search maximizing min(margin(+y), margin(-y)) from the best scan
    candidate.  Exhaustion returns NoneFound with the probe count; any hit
    is returned with both membership certificates.

    `candidates` are extra level-1 directions tried before the sweep; a
    lineality line through the cone must be a two-sided nonnegative
    combination, so callers holding the generator list get a cheap first
    pass along it.
    """
    budget = budget or ProbeBudget()
    eps = budget.eps

    def evaluate(el):
        return member(el, eps), member(-el, eps)

    dirs = []
    if level == 1:
        for cand in candidates:
            coeffs = cand.coeffs if isinstance(cand, VElement) else np.asarray(cand, float)
            norm = np.linalg.norm(coeffs)
            if norm > 1e-12:
                dirs.append(VElement(space, coeffs / norm))
    dirs += _probe_directions(space, level, budget.directions, budget.seed)
    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as ex:
            outcomes = list(ex.map(evaluate, dirs))
    else:
        outcomes = [evaluate(el) for el in dirs]
    probes = 2 * len(dirs)

    best, best_margin = None, -np.inf
    for el, (rp, rm) in zip(dirs, outcomes):
        if rp.is_inside and rm.is_inside:
            return ProbeResult(True, el, rp, rm, probes)
        m = min(_margin(rp), _margin(rm))
        if m > best_margin:
            best, best_margin = el, m

    if best is None or budget.ascent_steps <= 0:
        return ProbeResult(False, None, None, None, probes)

    # Pattern search on the unit sphere of coefficient space.
    def flat(el):
        return el.coeffs.copy() if level == 1 else el.blocks.copy()

    def unflat(arr):
        if level == 1:
            return VElement(space, arr / np.linalg.norm(arr))
        b = hermitize(arr)
        return HermLevel(space, b / np.linalg.norm(b))

    def herm_axes():
        if level == 1:
            return [np.eye(space.dim)[k] for k in range(space.dim)]
        axes = []
        for h in _herm_basis(level):
            for k in range(space.dim):
                a = np.zeros((space.dim, level, level), dtype=complex)
                a[k] = h
                axes.append(a)
        return axes

    y = flat(best)
    y = y / np.linalg.norm(y)
    current = best_margin
    step = budget.step0
    evals = 0
    axes = herm_axes()
    rng = rng_generator(budget.seed, 0x9B, level)

    def fresh_poll():
        # axis steps alone stall on the kinked min-margin ridges the two
        # separator sides produce; refreshed random directions escape them
        extra = []
        for _ in range(len(axes)):
            r = rng.standard_normal(len(axes))
            v = sum(c * ax for c, ax in zip(r, axes))
            extra.append(v / np.linalg.norm(v))
        return list(axes) + extra

    while evals < budget.ascent_steps and step > 1e-9:
        improved = False
        for ax in fresh_poll():
            for sgn in (1.0, -1.0):
                if evals >= budget.ascent_steps:
                    break
                cand = unflat(y + sgn * step * ax)
                rp, rm = evaluate(cand)
                probes += 2
                evals += 1
                if rp.is_inside and rm.is_inside:
                    return ProbeResult(True, cand, rp, rm, probes)
                m = min(_margin(rp), _margin(rm))
                if m > current + 1e-15:
                    y = flat(cand)
                    current = m
                    improved = True
        step = min(step * 2.0, budget.step0) if improved else step * 0.5
    return ProbeResult(False, None, None, None, probes)
