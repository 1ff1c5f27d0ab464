"""Inductive cone iteration: alternating projection and d-minimalization.

Stage k applies one step to the previous matrix ordering: even stages
adjoin one projection relation (round robin over the labels), odd stages
pass to the d-minimal ordering.  Oracles are materialized at levels 1, d,
2d only; higher levels are reached through compressions.  Every Inside
verdict lands in a ledger that downstream soundness checks replay, and a
properness probe runs after each stage so lineality aborts the run.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .cones import (
    BudgetExhausted,
    EPS_SCHEDULE,
    MembershipResult,
    ProbeBudget,
    SeparatorCert,
    WorkBudget,
    build_initial_cone,
    lp_member,
    omax_member,
    properness_probe,
    validate_stack_separator,
)
from .errors import InvalidParameterError
from .numerics import nnls
from .projections import Refutation, cnp_member, dmin_sampled_certify, relation_check
from .rng import derive_seed
from .rng import generator as rng_generator
from .spaces import MUB, HermLevel, VElement

TRACK_EPS = min(EPS_SCHEDULE)


# --- step schedule --------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectionStep:
    """Adjoin the relation cone of one projection label (1-based)."""
    target: int

    def describe(self):
        return f"projection[{self.target}]"


@dataclass(frozen=True)
class DMinStep:
    def describe(self):
        return "d-min"


def step_schedule(k, space):
    """Stage kind for index k: even k = 2m targets label (m mod labels)+1,
    odd k is d-minimalization.  The label round robin wraps, matching the
    convention that the projection list repeats past its end."""
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise InvalidParameterError(f"stage index must be a nonnegative integer, got {k!r}")
    if k % 2 == 0:
        m = k // 2
        return ProjectionStep((m % space.n_labels) + 1)
    return DMinStep()


# --- oracles ---------------------------------------------------------------------------

def _element_key(x):
    if isinstance(x, VElement):
        return ("v", x.coeffs.tobytes())
    return ("h", x.n, x.blocks.tobytes())


def _normalize(x):
    if isinstance(x, HermLevel) and x.n == 1:
        return x.to_velement()
    return x


def _level_of(x):
    return 1 if isinstance(x, VElement) else x.n


class BaseOracle:
    """Stage-(-1) membership: the OMAX ordering over the initial level-1
    cone, decided by the cone engine at levels 1, d, 2d."""

    index = -1

    rows_prevalidated = True

    def __init__(self, cone, work=None, dykstra_iter=800, polish_iters=2500):
        self.cone = cone
        self.levels = (1, cone.space.d, 2 * cone.space.d)
        self.work = work
        self.dykstra_iter = dykstra_iter
        self.polish_iters = polish_iters
        self.memo = {}

    def query(self, x, eps):
        x = _normalize(x)
        n = _level_of(x)
        if n not in self.levels:
            raise InvalidParameterError(
                f"oracles are materialized at levels {self.levels}, got {n}")
        key = (_element_key(x), float(eps))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if n == 1:
            res = lp_member(self.cone, x, eps, work=self.work)
        else:
            res = omax_member(self.cone, x, eps, work=self.work,
                              dykstra_iter=self.dykstra_iter,
                              polish_iters=self.polish_iters)
        self.memo[key] = res
        return res

    def validate_stack(self, stack, target_blocks):
        return validate_stack_separator(self.cone, stack, target_blocks)

    @property
    def row_duals(self):
        return self.cone.row_functionals()[0]

    __call__ = query


def _structural_dual_coeffs(space, cert):
    """Nonnegative label/unit decomposition of a separator's dual element.

    A level-1 separator f = <w, .> whose dual element w is a nonnegative
    combination of label elements and the unit has a positive semidefinite
    image under every positive representation of the system, so f stays
    nonnegative on every stage cone (each stage ordering extends the
    representation completely positively; the ledger soundness replay
    monitors exactly that).  Such separators persist across stages.
    Returns the combination coefficients, or None when w has no such
    decomposition and persistence would be unsound.
    """
    if getattr(cert, "form", None) != "gram_element":
        return None
    w = np.asarray(cert.data, dtype=float)
    cols = [space.label_element(i).coeffs
            for i in range(1, space.n_labels + 1)]
    cols.append(space.unit_coeffs)
    fit = nnls(np.stack(cols, axis=1), w)
    if fit.residual <= 1e-9 * (1.0 + float(np.linalg.norm(w))):
        return fit.coeffs
    return None


@dataclass
class LedgerEntry:
    stage: int
    level: int
    element: object
    epsilon: float
    certificate: object
    route: str

    def to_json_dict(self):
        return {"stage": self.stage, "level": self.level,
                "element": self.element.to_json_dict(),
                "epsilon": self.epsilon, "route": self.route}


class StageOracle:
    """Membership for one stage, composed over the previous stage.

    Inside verdicts inherit upward (the cones only grow), so the previous
    oracle is always consulted first.  The stage machinery then depends on
    the step kind: a projection stage decides levels 1 and d through the
    lift into the previous level-2d cone; a d-min stage is the identity at
    levels <= d and refutes at level 2d by sampled compressions into its
    own level-d cone.  Verdicts the machinery cannot reach stay Unknown.
    """

    def __init__(self, index, kind, prev, space, ledger, seed=0,
                 dmin_samples=64, cnp_patience=2, cnp_attempts=12):
        self.index = index
        self.kind = kind
        self.prev = prev
        self.space = space
        self.levels = (1, space.d, 2 * space.d)
        self.ledger = ledger
        self.seed = seed
        self.dmin_samples = dmin_samples
        self.cnp_patience = cnp_patience
        self.cnp_attempts = cnp_attempts
        self.memo = {}
        self.rows_prevalidated = True
        self.row_duals = self._inherit_rows()

    def _inherit_rows(self):
        """Row duals that stay valid through this stage.

        A level-1 row r that is nonnegative on the previous cone keeps
        r (x) w w* nonnegative on the stage cone for every vector w: a
        d-min stage compresses any member to level 1 where r applies, and
        a projection stage evaluates r (x) (w,0)(w,0)* on the membership
        lift, where r . perp = 0 makes the padding invisible and the unit
        slack absorbs the eps p term.  Projection stages therefore keep
        only the rows orthogonal to the adjoined perp.
        """
        rows = getattr(self.prev, "row_duals", None)
        if rows is None:
            return None
        rows = np.asarray(rows)
        if isinstance(self.kind, ProjectionStep):
            perp = self.space.unit_coeffs \
                - self.space.label_element(self.kind.target).coeffs
            keep = np.abs(rows @ perp) <= 1e-11
            rows = rows[keep]
        return rows

    def query(self, x, eps):
        x = _normalize(x)
        n = _level_of(x)
        if n not in self.levels:
            raise InvalidParameterError(
                f"oracles are materialized at levels {self.levels}, got {n}")
        key = (_element_key(x), float(eps))
        hit = self.memo.get(key)
        if hit is not None:
            return hit

        prev = self.prev.query(x, eps)
        if prev.is_inside:
            diag = dict(prev.diagnostics)
            diag["inherited_from"] = getattr(self.prev, "index", -1)
            res = MembershipResult.inside(eps, prev.certificate, **diag)
            route = "inherited"
        elif isinstance(self.kind, DMinStep) and n <= self.space.d:
            # levels <= d are untouched by d-minimalization
            res = prev
            route = "dmin_identity"
        elif prev.is_outside and n == 1 and \
                _structural_dual_coeffs(self.space, prev.certificate) is not None:
            diag = dict(prev.diagnostics)
            diag["persistent_separator"] = True
            diag["persisted_from"] = getattr(self.prev, "index", -1)
            res = MembershipResult.outside(eps, prev.certificate, **diag)
            route = "persistent"
        else:
            res, route = self._stage_decision(x, n, eps, prev)

        if res.is_inside:
            self.ledger.append(LedgerEntry(
                self.index, n, x, float(eps), res.certificate, route))
        self.memo[key] = res
        return res

    __call__ = query

    def _stage_decision(self, x, n, eps, prev):
        d = self.space.d
        if isinstance(self.kind, ProjectionStep):
            if n == 2 * d:
                return MembershipResult.unknown(
                    eps, reason="projection stage is undecided at level 2d "
                    "without a level-4d oracle"), "projection_undecided"
            p = self.space.label_element(self.kind.target)
            query = x.to_level(1).pad(d) if n == 1 else x
            res = cnp_member(self.prev, query, p, eps,
                             unknown_patience=self.cnp_patience,
                             max_attempts=self.cnp_attempts)
            diag = dict(res.diagnostics, target_label=self.kind.target)
            if n == 1:
                diag["padded_to"] = d
            if res.is_inside:
                return MembershipResult.inside(eps, res.certificate, **diag), "cnp"
            if res.is_outside:
                return MembershipResult.outside(eps, res.certificate, **diag), "cnp"
            return MembershipResult.unknown(eps, **diag), "cnp"

        # d-min stage at level 2d: hunt for a refuting compression into the
        # stage's own level-d cone (identical to the previous stage's).
        outcome = dmin_sampled_certify(
            self, x, eps, samples=self.dmin_samples,
            seed=derive_seed(self.seed, 0xD33, self.index))
        if isinstance(outcome, Refutation):
            inner = outcome.certificate
            cert = SeparatorCert(
                "compression",
                {"alpha": inner.alpha, "inner": inner.violation.certificate},
                None,
                dict(inner.violation.certificate.validation,
                     compressed_level=self.space.d))
            return MembershipResult.outside(
                eps, cert, evaluations=outcome.evaluations), "dmin_compression"
        return MembershipResult.unknown(
            eps, survived_samples=outcome.count), "dmin_survived"


# --- iteration driver --------------------------------------------------------------------

@dataclass
class StageRecord:
    index: int
    kind: str
    probe_found: bool
    probes_used: int
    ledger_size: int
    nesting_ok: bool
    nesting_failures: list
    relation_checks: list
    wall_time_s: float

    def to_json_dict(self, include_timing=True):
        out = {"index": self.index, "kind": self.kind,
               "probe_found": self.probe_found, "probes_used": self.probes_used,
               "ledger_size": self.ledger_size, "nesting_ok": self.nesting_ok,
               "nesting_failures": self.nesting_failures,
               "relation_checks": self.relation_checks}
        if include_timing:
            out["wall_time_s"] = self.wall_time_s
        return out


@dataclass
class IterationReport:
    space: object
    tseq: object
    n_max: int
    stages_requested: int
    seed: int
    stages: list = field(default_factory=list)
    ledger: list = field(default_factory=list)
    oracles: list = field(default_factory=list)
    base: object = None
    tracked: dict = field(default_factory=dict)
    lineality: dict | None = None
    error: dict | None = None

    @property
    def stages_completed(self):
        return len(self.stages)

    @property
    def aborted(self):
        return self.lineality is not None

    def to_json_dict(self, include_timing=True):
        return {
            "config": {
                "space": self.space.to_json_dict(),
                "tseq": self.tseq.to_json_dict(),
                "n_max": self.n_max,
                "stages": self.stages_requested,
                "seed": self.seed,
            },
            "stages_completed": self.stages_completed,
            "stages": [s.to_json_dict(include_timing) for s in self.stages],
            "ledger_size": len(self.ledger),
            "tracked": self.tracked,
            "lineality": self.lineality,
            "error": self.error,
        }


def _budgeted(base, query, x, eps, limit):
    """Run one top-level query under a fresh work budget on the base solver.

    Exhaustion degrades to Unknown (sound: never a verdict) and the partial
    result is not memoized, since the exception unwinds before any stage
    stores it.  The budget lives on the base oracle so every inner solve of
    a composed query charges the same meter.
    """
    base.work = WorkBudget(limit)
    try:
        return query(x, eps)
    except BudgetExhausted:
        return MembershipResult.unknown(eps, budget_exhausted=True,
                                        work_limit=limit)
    finally:
        base.work = None


def _sample_relation_pairs(space, seed, stage_index, count):
    """Deterministic distinct label pairs; MUB pairs are cross-basis so the
    sampled relation constant is the space constant."""
    rng = rng_generator(seed, 0x4E7, stage_index)
    pairs = []
    guard = 0
    while len(pairs) < count and guard < 200:
        guard += 1
        i, j = (int(v) + 1 for v in rng.choice(space.n_labels, size=2, replace=False))
        if space.kind == MUB:
            d = space.d
            if (i - 1) % (d + 1) == (j - 1) % (d + 1):
                continue
        if (i, j) not in pairs:
            pairs.append((i, j))
    return pairs


def run_iteration(space, tseq, n_max, stages, probe_budget=None, seed=0,
                  extra_generators=(), relation_samples=2, dmin_samples=64,
                  cnp_patience=2, cnp_attempts=12, probe_work=12,
                  heavy_work=512, threads=None):
    """Drive the alternating construction for a number of stages.

    Builds the initial cone, then per stage: composes the stage oracle,
    re-certifies every ledger element (nesting), spot-checks sampled
    projection relations on the harmonic schedule, queries the tracked
    elements, and probes properness at level 1.  A successful probe aborts
    the run with the lineality direction recorded.

    Every top-level query runs under a work budget on base-solver calls
    (`probe_work` per probe direction, `heavy_work` for nesting, relation,
    and tracked queries); exhaustion degrades that query to Unknown.  Probe
    directions are evaluated serially so the budget meter and the shared
    ledger stay deterministic; `threads` is accepted for API stability and
    ignored here.
    """
    if not isinstance(stages, (int, np.integer)) or stages < 1:
        raise InvalidParameterError(f"stages must be a positive integer, got {stages!r}")
    cone = build_initial_cone(space, tseq, n_max)
    if extra_generators:
        cone = cone.augmented(list(extra_generators))
    base = BaseOracle(cone)
    budget = probe_budget or ProbeBudget(directions=48, ascent_steps=12)
    harmonic = tuple(1.0 / n for n in range(1, n_max + 1))

    report = IterationReport(space, tseq, int(n_max), int(stages), int(seed))
    report.base = base
    prev = base
    unit = space.unit()

    for k in range(int(stages)):
        t0 = time.perf_counter()
        kind = step_schedule(k, space)
        stage = StageOracle(k, kind, prev, space, report.ledger, seed=seed,
                            dmin_samples=dmin_samples,
                            cnp_patience=cnp_patience,
                            cnp_attempts=cnp_attempts)
        try:
            seen = set()
            recheck = []
            for entry in list(report.ledger):
                key = (_element_key(entry.element), entry.epsilon)
                if key not in seen:
                    seen.add(key)
                    recheck.append((entry.element, entry.epsilon))
            failures = []
            for element, epsilon in recheck:
                res = _budgeted(base, stage.query, element, epsilon, heavy_work)
                if not res.is_inside:
                    failures.append({"level": _level_of(element),
                                     "epsilon": epsilon,
                                     "verdict": res.verdict})

            _budgeted(base, stage.query, unit, TRACK_EPS, heavy_work)
            if isinstance(kind, ProjectionStep):
                _budgeted(base, stage.query, space.label_element(kind.target),
                          TRACK_EPS, heavy_work)

            def heavy_query(el, ep):
                return _budgeted(base, stage.query, el, ep, heavy_work)

            relations = []
            for i, j in _sample_relation_pairs(space, seed, k, relation_samples):
                verdict = relation_check(
                    heavy_query, space.label_element(j), space.label_element(i),
                    space.constant, schedule=harmonic,
                    unknown_patience=cnp_patience)
                relations.append({"pair": [i, j], "tau": space.constant,
                                  "holds": verdict.holds})

            def probe_query(el, ep):
                return _budgeted(base, stage.query, el, ep, probe_work)

            probe = properness_probe(probe_query, space, level=1, budget=budget,
                                     candidates=cone.generators)
        except Exception as exc:  # stage construction failure truncates the run
            report.error = {"stage": k, "error": f"{type(exc).__name__}: {exc}"}
            break

        report.oracles.append(stage)
        report.stages.append(StageRecord(
            k, kind.describe(), probe.found, probe.probes_used,
            len(report.ledger), not failures, failures, relations,
            time.perf_counter() - t0))

        if probe.found:
            report.lineality = {
                "stage": k,
                "direction": [float(c) for c in probe.direction.coeffs],
                "plus": probe.result_plus.to_json_dict(),
                "minus": probe.result_minus.to_json_dict(),
            }
            break
        prev = stage

    if report.oracles:
        for name, el in (("e", unit), ("-e", -unit)):
            res = limit_member(report, el, TRACK_EPS, work_limit=heavy_work)
            report.tracked[name] = {"verdict": res.verdict,
                                    "stage": res.diagnostics.get("limit_stage")}
    return report


def limit_member(report, x, eps, work_limit=None):
    """Membership in the limit ordering: Inside at the earliest stage that
    certifies x + eps unit, Outside only on the final stage's say-so."""
    if not report.oracles:
        raise InvalidParameterError("iteration completed no stages")

    def ask(stage, el, ep):
        if work_limit is None:
            return stage.query(el, ep)
        return _budgeted(report.base, stage.query, el, ep, work_limit)

    for stage in report.oracles:
        res = ask(stage, x, eps)
        if res.is_inside:
            diag = dict(res.diagnostics)
            diag["limit_stage"] = stage.index
            return MembershipResult.inside(eps, res.certificate, **diag)
    final = ask(report.oracles[-1], x, eps)
    if final.is_outside:
        diag = dict(final.diagnostics)
        diag["limit_stage"] = report.oracles[-1].index
        return MembershipResult.outside(eps, final.certificate, **diag)
    return MembershipResult.unknown(eps, limit_stage=None)
