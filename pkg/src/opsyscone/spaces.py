"""Finite-dimensional *-vector spaces spanned by abstract projections.

Two kinds are supported.  A SIC-kind space of parameter d has d^2 basis
projections p_1..p_{d^2}, order unit e = (1/d) * sum_k p_k and pairwise
constant lam = 1/(d+1).  A MUB-kind space has d(d+1) projection labels
p_i^x (i = 1..d, x = 1..d+1) subject to sum_i p_i^x = e for every x; the
independent basis used for coordinates is {e} followed by p_i^x for
i <= d-1, and the pairwise constant is mu = 1/d.

Elements are stored as real coefficient vectors over the basis (level 1)
or as stacks of Hermitian coefficient matrices x = sum_k A_k (x) p_k
(level n).  Hermitian blocks are enforced structurally: the upper triangle
is authoritative and the lower triangle is derived from it, so A_k equals
its conjugate transpose exactly.

A concrete diagonal-matrix model of the basis (d^2-dimensional diagonals)
witnesses linear independence and backs the exactness tests for the MUB
relations.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidGeneratorError,
    InvalidParameterError,
    NumericInputError,
)

SIC = "sic"
MUB = "mub"


def hermitize(blocks):
    """Rebuild the lower triangle from the upper one, forcing a real diagonal.

    Works on a single matrix or a stack; idempotent bit-for-bit.
    """
    a = np.asarray(blocks, dtype=complex)
    upper = np.triu(a, 1)
    out = upper + np.conjugate(np.swapaxes(upper, -1, -2))
    idx = np.arange(a.shape[-1])
    out[..., idx, idx] = a[..., idx, idx].real
    return out


def _check_finite(a, what):
    if not np.all(np.isfinite(np.asarray(a).view(float) if np.iscomplexobj(a) else a)):
        raise NumericInputError(f"{what} contains non-finite entries")


@dataclass(frozen=True, eq=False)
class StarSpace:
    """Coordinate system + projection labels for one space kind."""

    kind: str
    d: int
    dim: int
    constant: float            # lam = 1/(d+1) for SIC, mu = 1/d for MUB
    labels: tuple              # all projection label names
    label_coeffs: np.ndarray   # (n_labels, dim) expansion of each label
    unit_coeffs: np.ndarray    # (dim,) expansion of e
    basis_names: tuple         # names of the dim independent basis elements
    model_diags: np.ndarray    # (dim, d^2) concrete diagonal model of the basis

    def __eq__(self, other):
        return isinstance(other, StarSpace) and self.kind == other.kind and self.d == other.d

    def __hash__(self):
        return hash((self.kind, self.d))

    @property
    def n_labels(self):
        return len(self.labels)

    def unit(self):
        return VElement(self, self.unit_coeffs.copy())

    def label_element(self, k):
        """Projection for 1-based label index k."""
        if not 1 <= k <= self.n_labels:
            raise InvalidGeneratorError(f"label index {k} out of 1..{self.n_labels}")
        return VElement(self, self.label_coeffs[k - 1].copy())

    def perp(self, v):
        """e - v."""
        return VElement(self, self.unit_coeffs - v.coeffs)

    def model_of(self, coeffs):
        """Concrete diagonal (length d^2) realizing a coefficient vector."""
        return self.model_diags.T @ np.asarray(coeffs, dtype=float)

    def to_json_dict(self):
        return {"kind": self.kind, "d": self.d}


def build_sic_space(d):
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidDimensionError(f"SIC space needs integer d >= 2, got {d!r}")
    d = int(d)
    dim = d * d
    lam = 1.0 / (d + 1)
    labels = tuple(f"p{k}" for k in range(1, dim + 1))
    label_coeffs = np.eye(dim)
    unit = np.full(dim, 1.0 / d)
    model = np.eye(dim)  # p_k -> E_k as a diagonal of M_{d^2}
    return StarSpace(SIC, d, dim, lam, labels, label_coeffs, unit, labels, model)


def build_mub_space(d):
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidDimensionError(f"MUB space needs integer d >= 2, got {d!r}")
    d = int(d)
    dim = d * d
    mu = 1.0 / d

    # Basis: e, then p_i^x for i <= d-1 (i outer, x inner).
    basis_names = ["e"]
    slot = {}
    for i in range(1, d):
        for x in range(1, d + 2):
            slot[(i, x)] = len(basis_names)
            basis_names.append(f"p{i}^{x}")

    labels = []
    label_coeffs = np.zeros((d * (d + 1), dim))
    row = 0
    for i in range(1, d + 1):
        for x in range(1, d + 2):
            labels.append(f"p{i}^{x}")
            if i < d:
                label_coeffs[row, slot[(i, x)]] = 1.0
            else:
                # p_d^x = e - sum_{i<d} p_i^x; integer coefficients, exact.
                label_coeffs[row, 0] = 1.0
                for j in range(1, d):
                    label_coeffs[row, slot[(j, x)]] = -1.0
            row += 1

    unit = np.zeros(dim)
    unit[0] = 1.0

    # Concrete model: diagonals of M_{d^2} = (M_{d-1} (x) M_{d+1}) (+) M_1.
    model = np.zeros((dim, dim))
    model[0] = 1.0  # e -> identity
    for (i, x), b in slot.items():
        model[b, (i - 1) * (d + 1) + (x - 1)] = 1.0
    return StarSpace(MUB, d, dim, mu, tuple(labels), label_coeffs, unit,
                     tuple(basis_names), model)


def build_space(kind, d):
    kind = str(kind).lower()
    if kind == SIC:
        return build_sic_space(d)
    if kind == MUB:
        return build_mub_space(d)
    raise InvalidParameterError(f"unknown space kind {kind!r}")


class VElement:
    """Self-adjoint element as a real coefficient vector over the basis."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (space.dim,):
            raise DimensionMismatchError(
                f"expected {space.dim} coefficients, got shape {coeffs.shape}")
        _check_finite(coeffs, "coefficient vector")
        self.space = space
        self.coeffs = coeffs

    def _same_space(self, other):
        if self.space != other.space:
            raise DimensionMismatchError("elements live over different spaces")

    def __add__(self, other):
        self._same_space(other)
        return VElement(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._same_space(other)
        return VElement(self.space, self.coeffs - other.coeffs)

    def __neg__(self):
        return VElement(self.space, -self.coeffs)

    def __mul__(self, s):
        return VElement(self.space, self.coeffs * float(s))

    __rmul__ = __mul__

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def to_level(self, n=1):
        """Level-n embedding: the element in the (1,1) corner, zero elsewhere."""
        blocks = np.zeros((self.space.dim, n, n), dtype=complex)
        blocks[:, 0, 0] = self.coeffs
        return HermLevel(self.space, blocks)

    def to_json_dict(self):
        from ._jsonutil import complex_matrix_to_json
        return {
            "space": self.space.to_json_dict(),
            "level": 1,
            "blocks": [complex_matrix_to_json(np.array([[c]])) for c in self.coeffs],
        }

    def __repr__(self):
        return f"VElement({self.space.kind}, d={self.space.d}, coeffs={self.coeffs!r})"


class HermLevel:
    """Level-n element x = sum_k A_k (x) p_k with Hermitian n x n blocks A_k."""

    __slots__ = ("space", "blocks")

    def __init__(self, space, blocks):
        blocks = np.asarray(blocks, dtype=complex)
        if blocks.ndim != 3 or blocks.shape[0] != space.dim or blocks.shape[1] != blocks.shape[2]:
            raise DimensionMismatchError(
                f"blocks must have shape ({space.dim}, n, n), got {blocks.shape}")
        if blocks.shape[1] < 1:
            raise InvalidParameterError("level must be >= 1")
        _check_finite(blocks, "block stack")
        self.space = space
        self.blocks = hermitize(blocks)

    @property
    def n(self):
        return self.blocks.shape[1]

    @classmethod
    def unit(cls, space, n):
        """I_n (x) e."""
        eye = np.eye(n, dtype=complex)
        return cls(space, space.unit_coeffs[:, None, None] * eye[None, :, :])

    def _same_space(self, other):
        if self.space != other.space or self.n != other.n:
            raise DimensionMismatchError("level elements incompatible")

    def __add__(self, other):
        self._same_space(other)
        return HermLevel(self.space, self.blocks + other.blocks)

    def __sub__(self, other):
        self._same_space(other)
        return HermLevel(self.space, self.blocks - other.blocks)

    def __neg__(self):
        return HermLevel(self.space, -self.blocks)

    def __mul__(self, s):
        return HermLevel(self.space, self.blocks * float(s))

    __rmul__ = __mul__

    def norm(self):
        return float(np.linalg.norm(self.blocks))

    def to_velement(self):
        if self.n != 1:
            raise DimensionMismatchError("only level-1 elements convert to VElement")
        return VElement(self.space, self.blocks[:, 0, 0].real)

    def pad(self, n):
        """Embed into level n >= current by a zero corner (x -> x (+) 0)."""
        if n < self.n:
            raise InvalidParameterError(f"cannot pad level {self.n} down to {n}")
        if n == self.n:
            return self
        blocks = np.zeros((self.space.dim, n, n), dtype=complex)
        blocks[:, : self.n, : self.n] = self.blocks
        return HermLevel(self.space, blocks)

    def key(self):
        """Hashable identity for memoization."""
        return (self.space.kind, self.space.d, self.n, self.blocks.tobytes())

    def to_json_dict(self):
        from ._jsonutil import complex_matrix_to_json
        return {
            "space": self.space.to_json_dict(),
            "level": self.n,
            "blocks": [complex_matrix_to_json(b) for b in self.blocks],
        }

    def __repr__(self):
        return f"HermLevel({self.space.kind}, d={self.space.d}, n={self.n})"


def element_from_json(payload, space=None):
    """Inverse of to_json_dict for both element classes."""
    from ._jsonutil import complex_matrix_from_json
    if space is None:
        space = build_space(payload["space"]["kind"], payload["space"]["d"])
    n = int(payload["level"])
    blocks = np.stack([complex_matrix_from_json(b, (n, n)) for b in payload["blocks"]])
    lvl = HermLevel(space, blocks)
    return lvl.to_velement() if n == 1 else lvl


def compress(x, alpha):
    """alpha* x alpha for a level-n element and alpha in M_{n,k}."""
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.ndim != 2:
        raise DimensionMismatchError("alpha must be a matrix")
    _check_finite(alpha, "compression matrix")
    lvl = x.to_level(1) if isinstance(x, VElement) else x
    if alpha.shape[0] != lvl.n:
        raise DimensionMismatchError(
            f"alpha has {alpha.shape[0]} rows, element lives at level {lvl.n}")
    if alpha.shape[1] < 1:
        raise InvalidParameterError("alpha needs at least one column")
    out = np.matmul(alpha.conj().T[None, :, :], np.matmul(lvl.blocks, alpha[None, :, :]))
    return HermLevel(lvl.space, out)


# --- generator specifications -------------------------------------------------

@dataclass(frozen=True)
class BasisProj:
    """p_k (SIC) or the k-th projection label (MUB)."""
    k: int


@dataclass(frozen=True)
class BasisProjPerp:
    """e - p_k."""
    k: int


@dataclass(frozen=True)
class XPlus:
    """(p_i - lam e) + (1/n) p_j + t_n (e - p_j), SIC kind, i != j."""
    i: int
    j: int
    n: int
    t: float


@dataclass(frozen=True)
class XMinus:
    """(lam e - p_i) + (1/n) p_j + t_n (e - p_j), SIC kind, i != j."""
    i: int
    j: int
    n: int
    t: float


@dataclass(frozen=True)
class YPlus:
    """(p_i^x - mu e) + (1/n) p_j^y + t_n (e - p_j^y), MUB kind, x != y."""
    x: int
    i: int
    y: int
    j: int
    n: int
    t: float


@dataclass(frozen=True)
class YMinus:
    """(mu e - p_i^x) + (1/n) p_j^y + t_n (e - p_j^y), MUB kind, x != y."""
    x: int
    i: int
    y: int
    j: int
    n: int
    t: float


def _check_nt(n, t):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidGeneratorError(f"generator index n must be a positive integer, got {n!r}")
    t = float(t)
    if not np.isfinite(t) or t <= 0:
        raise InvalidParameterError(f"padding coefficient t must be positive, got {t!r}")
    return t


def _mub_label_index(space, i, x):
    d = space.d
    if not (1 <= i <= d and 1 <= x <= d + 1):
        raise InvalidGeneratorError(f"MUB label (i={i}, x={x}) out of range for d={d}")
    return (i - 1) * (d + 1) + x


def spec_label(spec):
    """Deterministic display name for a generator specification."""
    if isinstance(spec, BasisProj):
        return f"proj[{spec.k}]"
    if isinstance(spec, BasisProjPerp):
        return f"perp[{spec.k}]"
    if isinstance(spec, XPlus):
        return f"x+[i={spec.i},j={spec.j},n={spec.n}]"
    if isinstance(spec, XMinus):
        return f"x-[i={spec.i},j={spec.j},n={spec.n}]"
    if isinstance(spec, YPlus):
        return f"y+[x={spec.x},i={spec.i},y={spec.y},j={spec.j},n={spec.n}]"
    if isinstance(spec, YMinus):
        return f"y-[x={spec.x},i={spec.i},y={spec.y},j={spec.j},n={spec.n}]"
    raise InvalidGeneratorError(f"unknown generator spec {spec!r}")


def make_generator(space, spec):
    """Level-1 element for one generator specification."""
    if isinstance(spec, BasisProj):
        return space.label_element(spec.k)
    if isinstance(spec, BasisProjPerp):
        return space.perp(space.label_element(spec.k))

    if isinstance(spec, (XPlus, XMinus)):
        if space.kind != SIC:
            raise InvalidGeneratorError("x-family generators need a SIC-kind space")
        if spec.i == spec.j:
            raise InvalidGeneratorError("x-family generators need i != j")
        t = _check_nt(spec.n, spec.t)
        p_i = space.label_element(spec.i)
        p_j = space.label_element(spec.j)
        diff = p_i.coeffs - space.constant * space.unit_coeffs
        base = (1.0 / spec.n) * p_j.coeffs + t * (space.unit_coeffs - p_j.coeffs)
        sign = 1.0 if isinstance(spec, XPlus) else -1.0
        return VElement(space, base + sign * diff)

    if isinstance(spec, (YPlus, YMinus)):
        if space.kind != MUB:
            raise InvalidGeneratorError("y-family generators need a MUB-kind space")
        if spec.x == spec.y:
            raise InvalidGeneratorError("y-family generators need x != y")
        t = _check_nt(spec.n, spec.t)
        pi = space.label_element(_mub_label_index(space, spec.i, spec.x))
        pj = space.label_element(_mub_label_index(space, spec.j, spec.y))
        diff = pi.coeffs - space.constant * space.unit_coeffs
        base = (1.0 / spec.n) * pj.coeffs + t * (space.unit_coeffs - pj.coeffs)
        sign = 1.0 if isinstance(spec, YPlus) else -1.0
        return VElement(space, base + sign * diff)

    raise InvalidGeneratorError(f"unknown generator spec {spec!r}")
