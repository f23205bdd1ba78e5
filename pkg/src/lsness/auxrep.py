"""Truncated auxiliary-space representation: two bosons and a Verma module.

The auxiliary lattice is ``{|j, k, l>}`` (boson-up occupation, boson-down
occupation, Verma level) truncated to a box ``0 <= j, k, l <= cutoff``.
The nine Lax components act on it as sparse matrices.  The highest-weight
parameter of the Verma module is tied to the coupling, ``p = 1/2 - 1/eta``,
and only the products ``eta*(2p - l) = eta - 2 - eta*l`` and
``eta*(p - l) = eta/2 - 1 - eta*l`` ever appear, so every entry is a
polynomial in ``eta = i*eps``.

Matrix elements are addressed in ket convention: ``entries[(t, s)]`` is
``<t| A |s>``, i.e. ``A|s> = sum_t entries[(t, s)] |t>``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Callable, Dict, Iterable, NamedTuple

import numpy as np
import scipy.sparse as sp

from ._validation import check_basis, check_real
from .exceptions import CutoffError, UnsupportedCombinationError
from .report import Report
from .scalars import ONE, ZERO, ExactScalar

__all__ = [
    "AuxState",
    "VAC",
    "ReprParams",
    "AuxOperator",
    "LaxComponents",
    "VertexComponents",
    "LAX_NAMES",
    "build_generators",
    "build_conjugate",
    "apply_chemical_weight",
    "build_two_leg",
    "boson_operators",
    "check_lie_algebra",
    "check_vacuum_conditions",
    "check_weyl_heisenberg",
    "check_levi_structure",
    "STRUCTURE_CONSTANTS",
]


class AuxState(NamedTuple):
    j: int
    k: int
    l: int


VAC = AuxState(0, 0, 0)

LAX_NAMES = {
    (1, 1): "l_up", (1, 2): "t+", (1, 3): "v+",
    (2, 1): "t-", (2, 2): "l0", (2, 3): "u+",
    (3, 1): "v-", (3, 2): "u-", (3, 3): "l_dn",
}
_POSITIONS = {name: pos for pos, name in LAX_NAMES.items()}


@dataclass(frozen=True)
class ReprParams:
    """Parameters of the truncated representation.

    ``epsilon=None`` selects exact mode (formal coupling); a float selects
    numeric mode.  ``cutoff`` is either one integer or a ``(j, k, l)`` triple.
    ``spin_branch=-1`` picks the wrong Verma weight ``p = 1/2 + 1/eta`` and
    exists only as a negative control.
    """

    cutoff: int | tuple = 4
    basis: str = "monomial"
    epsilon: float | None = None
    mu: float | None = None
    spin_branch: int = 1

    def __post_init__(self):
        box = self.box
        if min(box) < 1:
            raise CutoffError(f"cutoff must be >= 1, got {self.cutoff}")
        check_real(self.epsilon, "epsilon", allow_none=True)
        check_real(self.mu, "mu", allow_none=True)
        check_basis(self.basis, self.mode)
        if self.spin_branch not in (1, -1):
            raise ValueError("spin_branch must be +1 or -1")

    @property
    def mode(self) -> str:
        return "exact" if self.epsilon is None else "numeric"

    @property
    def box(self) -> tuple:
        if isinstance(self.cutoff, (tuple, list)):
            return tuple(int(c) for c in self.cutoff)
        return (int(self.cutoff),) * 3

    @property
    def eta(self):
        if self.epsilon is None:
            return ExactScalar.eta()
        return 1j * self.epsilon

    def states(self) -> list:
        cj, ck, cl = self.box
        return [AuxState(j, k, l) for j in range(cj + 1) for k in range(ck + 1) for l in range(cl + 1)]


def _is_zero(c) -> bool:
    return not c


def _acc(out: dict, key, val) -> None:
    if key in out:
        v = out[key] + val
        if _is_zero(v):
            del out[key]
        else:
            out[key] = v
    elif not _is_zero(val):
        out[key] = val


class AuxOperator:
    """Sparse operator on the truncated auxiliary lattice."""

    __slots__ = ("entries", "box", "exact", "_by_source", "_by_target")

    def __init__(self, entries: dict, box: tuple, exact: bool):
        self.entries = {k: v for k, v in entries.items() if not _is_zero(v)}
        self.box = tuple(box)
        self.exact = exact
        by_source: dict = {}
        by_target: dict = {}
        for (t, s), c in self.entries.items():
            by_source.setdefault(s, []).append((t, c))
            by_target.setdefault(t, []).append((s, c))
        self._by_source = by_source
        self._by_target = by_target

    def zero(self):
        return ZERO if self.exact else 0j

    def entry(self, target, source):
        return self.entries.get((tuple(target), tuple(source)), self.zero())

    def column(self, source) -> list:
        """``[(target, coeff), ...]`` for ``A|source>``."""
        return self._by_source.get(tuple(source), [])

    def row(self, target) -> list:
        """``[(source, coeff), ...]`` for ``<target|A``."""
        return self._by_target.get(tuple(target), [])

    def apply(self, ket: dict) -> dict:
        out: dict = {}
        for s, c in ket.items():
            for t, a in self._by_source.get(s, ()):
                _acc(out, t, a * c)
        return out

    def apply_bra(self, bra: dict) -> dict:
        out: dict = {}
        for t, c in bra.items():
            for s, a in self._by_target.get(t, ()):
                _acc(out, s, c * a)
        return out

    def __matmul__(self, other: "AuxOperator") -> "AuxOperator":
        out: dict = {}
        for (m, s), b in other.entries.items():
            for t, a in self._by_source.get(m, ()):
                _acc(out, (t, s), a * b)
        return AuxOperator(out, self.box, self.exact)

    def __add__(self, other: "AuxOperator") -> "AuxOperator":
        out = dict(self.entries)
        for k, v in other.entries.items():
            _acc(out, k, v)
        return AuxOperator(out, self.box, self.exact)

    def __neg__(self):
        return AuxOperator({k: -v for k, v in self.entries.items()}, self.box, self.exact)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "AuxOperator":
        return AuxOperator({k: c * v for k, v in self.entries.items()}, self.box, self.exact)

    def conj(self) -> "AuxOperator":
        if self.exact:
            return AuxOperator({k: v.conj() for k, v in self.entries.items()}, self.box, True)
        return AuxOperator({k: complex(v).conjugate() for k, v in self.entries.items()}, self.box, False)

    def __eq__(self, other):
        if not isinstance(other, AuxOperator):
            return NotImplemented
        return self.box == other.box and self.entries == other.entries

    def max_targets_per_source(self) -> int:
        return max((len(v) for v in self._by_source.values()), default=0)

    def to_sparse(self, index: dict, eps: float | None = None, mu: float = 0.0) -> sp.csr_matrix:
        """CSR matrix ``M[index[t], index[s]] = <t|A|s>`` restricted to ``index``."""
        rows, cols, vals = [], [], []
        for (t, s), v in self.entries.items():
            if t in index and s in index:
                rows.append(index[t])
                cols.append(index[s])
                vals.append(v.evaluate(eps, mu) if self.exact else complex(v))
        dim = len(index)
        return sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(dim, dim))

    # -- dumps --------------------------------------------------------
    def dump_text(self) -> str:
        lines = []
        for (t, s), v in sorted(self.entries.items()):
            coeff = str(v) if self.exact else repr(complex(v))
            lines.append(f"{t[0]} {t[1]} {t[2]} {s[0]} {s[1]} {s[2]} {coeff}")
        return "\n".join(lines)

    def to_json(self, basis: str = "monomial") -> str:
        header = {"basis": basis, "cutoff": list(self.box), "mode": "exact" if self.exact else "numeric",
                  "convention": "<j k l| A |j' k' l'>"}
        entries = []
        for (t, s), v in sorted(self.entries.items()):
            coeff = v.to_json() if self.exact else [complex(v).real, complex(v).imag]
            entries.append([*t, *s, coeff])
        return json.dumps({"header": header, "entries": entries})

    @classmethod
    def from_json(cls, text: str) -> "AuxOperator":
        data = json.loads(text)
        exact = data["header"]["mode"] == "exact"
        entries = {}
        for row in data["entries"]:
            t, s, coeff = AuxState(*row[0:3]), AuxState(*row[3:6]), row[6]
            entries[(t, s)] = ExactScalar.from_json(coeff) if exact else complex(coeff[0], coeff[1])
        return cls(entries, tuple(data["header"]["cutoff"]), exact)


@dataclass(frozen=True)
class LaxComponents:
    """The nine components ``L^{ij}`` plus bookkeeping flags.

    ``eta`` is the coupling the components realize: ``i*eps`` for the
    original representation and its conjugate ``-i*eps`` after
    :func:`build_conjugate`.  ``weight`` is the factor carried by row 2.
    """

    comps: Dict[tuple, AuxOperator]
    params: ReprParams
    eta: object
    conjugated: bool = False
    weighted: bool = False
    weight: object = None

    def __getitem__(self, key) -> AuxOperator:
        if isinstance(key, str):
            key = _POSITIONS[key]
        return self.comps[key]

    @property
    def exact(self) -> bool:
        return self.params.mode == "exact"

    @property
    def box(self) -> tuple:
        return self.params.box

    def one(self):
        return ONE if self.exact else 1.0 + 0j

    def items(self):
        return self.comps.items()

    def __eq__(self, other):
        if not isinstance(other, LaxComponents):
            return NotImplemented
        return self.comps == other.comps


def _boson_factors(basis: str) -> tuple:
    if basis == "monomial":
        return (lambda m: 1), (lambda m: m)
    return (lambda m: math.sqrt(m + 1)), (lambda m: math.sqrt(m))


def build_generators(params: ReprParams) -> LaxComponents:
    """Realize the nine Lax components on the truncated lattice."""
    exact = params.mode == "exact"
    check_basis(params.basis, params.mode)
    eta = params.eta
    sigma = params.spin_branch
    up, down = _boson_factors(params.basis)
    cj, ck, cl = params.box
    ent: dict = {name: {} for name in LAX_NAMES.values()}
    for s in params.states():
        j, k, l = s
        if j > 0:
            ent["t+"][(AuxState(j - 1, k, l), s)] = ONE * down(j) if exact else complex(down(j))
        if j < cj:
            ent["t-"][(AuxState(j + 1, k, l), s)] = eta * up(j)
        if k > 0:
            ent["u+"][(AuxState(j, k - 1, l), s)] = eta * down(k)
        if k < ck:
            ent["u-"][(AuxState(j, k + 1, l), s)] = ONE * up(k) if exact else complex(up(k))
        if j > 0 and k > 0:
            ent["v+"][(AuxState(j - 1, k - 1, l), s)] = eta * (down(j) * down(k))
        if l > 0:
            ent["v+"][(AuxState(j, k, l - 1), s)] = eta * l
        if j < cj and k < ck:
            ent["v-"][(AuxState(j + 1, k + 1, l), s)] = eta * (up(j) * up(k))
        if l < cl:
            # -eta * s^- = -(eta*(2p - l)) = 2*sigma - eta + eta*l
            ent["v-"][(AuxState(j, k, l + 1), s)] = eta * (l - 1) + 2 * sigma
        # eta*(n + 1/2 - s^z) = sigma + eta*(n + l)
        ent["l_up"][(s, s)] = eta * (j + l) + sigma
        ent["l_dn"][(s, s)] = eta * (k + l) + sigma
        ent["l0"][(s, s)] = ONE if exact else 1.0 + 0j
    comps = {pos: AuxOperator(ent[name], params.box, exact) for pos, name in LAX_NAMES.items()}
    return LaxComponents(comps, params, eta, False, False, ONE if exact else 1.0 + 0j)


def boson_operators(params: ReprParams) -> dict:
    """``b_up, bd_up, b_dn, bd_dn`` in the chosen basis (truncated)."""
    exact = params.mode == "exact"
    up, down = _boson_factors(params.basis)
    cj, ck, _ = params.box
    one = ONE if exact else 1.0 + 0j
    ops = {"b_up": {}, "bd_up": {}, "b_dn": {}, "bd_dn": {}}
    for s in params.states():
        j, k, l = s
        if j > 0:
            ops["b_up"][(AuxState(j - 1, k, l), s)] = one * down(j)
        if j < cj:
            ops["bd_up"][(AuxState(j + 1, k, l), s)] = one * up(j)
        if k > 0:
            ops["b_dn"][(AuxState(j, k - 1, l), s)] = one * down(k)
        if k < ck:
            ops["bd_dn"][(AuxState(j, k + 1, l), s)] = one * up(k)
    return {name: AuxOperator(e, params.box, exact) for name, e in ops.items()}


def build_conjugate(L: LaxComponents, method: str = "entrywise") -> LaxComponents:
    """Conjugate representation ``Lbar``.

    ``method="entrywise"`` conjugates every matrix element;
    ``method="reflect"`` rebuilds the representation at ``eps -> -eps``
    (``eta -> -eta``, ``p -> 1/2 + 1/eta``).  Both give the same operators.
    """
    if L.conjugated:
        raise ValueError("components are already conjugated")
    if method == "entrywise":
        comps = {pos: op.conj() for pos, op in L.comps.items()}
    elif method == "reflect":
        if L.exact:
            comps = {pos: AuxOperator({k: _reflect_eps(v) for k, v in op.entries.items()}, op.box, True)
                     for pos, op in L.comps.items()}
        else:
            rebuilt = build_generators(replace(L.params, epsilon=-L.params.epsilon))
            comps = dict(rebuilt.comps)
            if L.weighted:
                comps = _weight_row2(comps, L.weight)
    else:
        raise ValueError(f"unknown method {method!r}")
    eta = L.eta.conj() if L.exact else complex(L.eta).conjugate()
    weight = L.weight.conj() if L.exact else complex(L.weight).conjugate()
    return LaxComponents(comps, L.params, eta, True, L.weighted, weight)


def _reflect_eps(v: ExactScalar) -> ExactScalar:
    return ExactScalar({(a, b): (c if a % 2 == 0 else -c) for (a, b), c in v.items()})


def _weight_row2(comps: dict, w) -> dict:
    out = dict(comps)
    for j in (1, 2, 3):
        out[(2, j)] = comps[(2, j)].scale(w)
    return out


def apply_chemical_weight(L: LaxComponents, mu: float | None = None) -> LaxComponents:
    """Multiply the row-2 components by the fugacity ``z = exp(mu/2)``.

    Exact mode uses the formal variable ``z`` and ignores ``mu``.
    """
    if L.weighted:
        raise ValueError("components are already chemically weighted")
    if L.exact:
        w = ExactScalar.z()
    else:
        if mu is None:
            mu = L.params.mu if L.params.mu is not None else 0.0
        w = complex(math.exp(check_real(mu, "mu") / 2.0))
    return LaxComponents(_weight_row2(L.comps, w), L.params, L.eta, L.conjugated, True, w)


# ---------------------------------------------------------------------------
# two-leg (doubled) components


class VertexComponents:
    """Two-leg components ``LL^{ij} = sum_k L^{ik} (x) Lbar^{jk}`` on the doubled lattice.

    Doubled states are pairs ``(s, sbar)``.  The action on bras and kets is
    evaluated lazily leg by leg; :meth:`operator` materializes one component
    as a dict ``{((t, tbar), (s, sbar)): coeff}``.
    """

    def __init__(self, L: LaxComponents, Lbar: LaxComponents):
        if L.box != Lbar.box:
            raise CutoffError(f"cutoff mismatch: {L.box} vs {Lbar.box}")
        if not Lbar.conjugated:
            raise ValueError("second leg must be a conjugated representation")
        if L.exact != Lbar.exact:
            raise UnsupportedCombinationError("both legs must share the arithmetic mode")
        self.L = L
        self.Lbar = Lbar
        self.exact = L.exact
        self._cache: dict = {}

    @property
    def box(self):
        return self.L.box

    def zero(self):
        return ZERO if self.exact else 0j

    def _pairs(self, i, j):
        return [(self.L[(i, k)], self.Lbar[(j, k)]) for k in (1, 2, 3)]

    def apply_bra(self, i: int, j: int, bra: dict) -> dict:
        """``bra . LL^{ij}``."""
        out: dict = {}
        for A, B in self._pairs(i, j):
            for (t, tb), c in bra.items():
                rows_a = A.row(t)
                if not rows_a:
                    continue
                rows_b = B.row(tb)
                for s, a in rows_a:
                    ca = c * a
                    for sb, b in rows_b:
                        _acc(out, (s, sb), ca * b)
        return out

    def apply_ket(self, i: int, j: int, ket: dict) -> dict:
        """``LL^{ij} . ket``."""
        out: dict = {}
        for A, B in self._pairs(i, j):
            for (s, sb), c in ket.items():
                cols_a = A.column(s)
                if not cols_a:
                    continue
                cols_b = B.column(sb)
                for t, a in cols_a:
                    ca = a * c
                    for tb, b in cols_b:
                        _acc(out, (t, tb), ca * b)
        return out

    def transfer_bra(self, bra: dict) -> dict:
        out: dict = {}
        for i in (1, 2, 3):
            for key, v in self.apply_bra(i, i, bra).items():
                _acc(out, key, v)
        return out

    def operator(self, i: int, j: int) -> dict:
        if (i, j) not in self._cache:
            out: dict = {}
            for A, B in self._pairs(i, j):
                for (t, s), a in A.entries.items():
                    for (tb, sb), b in B.entries.items():
                        _acc(out, ((t, tb), (s, sb)), a * b)
            self._cache[(i, j)] = out
        return self._cache[(i, j)]


def build_two_leg(L: LaxComponents, Lbar: LaxComponents) -> VertexComponents:
    return VertexComponents(L, Lbar)


# ---------------------------------------------------------------------------
# algebra checks

# [A, B] = eta * sum(coeff * C); generator l0 included.  Every unordered pair appears once.
STRUCTURE_CONSTANTS = {
    ("t+", "t-"): {"l0": 1},
    ("t+", "u+"): {}, ("t+", "u-"): {}, ("t+", "v+"): {},
    ("t+", "v-"): {"u-": 1},
    ("t-", "u+"): {}, ("t-", "u-"): {},
    ("t-", "v+"): {"u+": -1},
    ("t-", "v-"): {},
    ("u+", "u-"): {"l0": 1},
    ("u+", "v+"): {},
    ("u+", "v-"): {"t-": 1},
    ("u-", "v+"): {"t+": -1},
    ("u-", "v-"): {},
    ("v+", "v-"): {"l_up": 1, "l_dn": 1},
    ("l_up", "t+"): {"t+": -1}, ("l_up", "t-"): {"t-": 1},
    ("l_up", "u+"): {}, ("l_up", "u-"): {},
    ("l_up", "v+"): {"v+": -1}, ("l_up", "v-"): {"v-": 1},
    ("l_dn", "t+"): {}, ("l_dn", "t-"): {},
    ("l_dn", "u+"): {"u+": -1}, ("l_dn", "u-"): {"u-": 1},
    ("l_dn", "v+"): {"v+": -1}, ("l_dn", "v-"): {"v-": 1},
    ("l_up", "l_dn"): {},
    ("l_up", "l0"): {}, ("l_dn", "l0"): {},
    ("t+", "l0"): {}, ("t-", "l0"): {}, ("u+", "l0"): {}, ("u-", "l0"): {},
    ("v+", "l0"): {}, ("v-", "l0"): {},
}


def interior_states(box: tuple, margin: int = 2) -> list:
    """States whose coordinates stay inside the box after ``margin`` raising steps."""
    cj, ck, cl = box
    return [AuxState(j, k, l) for j in range(cj - margin + 1)
            for k in range(ck - margin + 1) for l in range(cl - margin + 1)]


def _ket_residual(vec: dict, exact: bool) -> float:
    if not vec:
        return 0.0
    if exact:
        return float(len(vec))
    return max(abs(v) for v in vec.values())


def _commutator_ket(A: AuxOperator, B: AuxOperator, s) -> dict:
    ket = {s: ONE if A.exact else 1.0 + 0j}
    ab = A.apply(B.apply(ket))
    ba = B.apply(A.apply(ket))
    out = dict(ab)
    for t, v in ba.items():
        _acc(out, t, -v)
    return out


def _combination_ket(L: LaxComponents, combo: dict, s, scale) -> dict:
    out: dict = {}
    for name, c in combo.items():
        for t, v in L[name].column(s):
            _acc(out, t, scale * c * v)
    return out


def _prune(vec: dict, tol: float, exact: bool) -> dict:
    if exact:
        return vec
    return {k: v for k, v in vec.items() if abs(v) > tol}


def check_lie_algebra(L: LaxComponents, tol: float = 1e-10) -> Report:
    """Every commutator of the Lie algebra on interior source states.

    Interior means all coordinates ``<= cutoff - 2`` so that both orderings of
    a product stay inside the truncation box.  Exact components must give
    an identically zero residual; numeric ones are held to ``tol``.
    """
    report = Report("lie-algebra")
    states = interior_states(L.box)
    if not states:
        raise CutoffError("cutoff too small for an interior (need cutoff >= 2)")
    for (a, b), combo in STRUCTURE_CONSTANTS.items():
        worst, first = 0.0, None
        for s in states:
            lhs = _commutator_ket(L[a], L[b], s)
            rhs = _combination_ket(L, combo, s, L.eta)
            for t, v in rhs.items():
                _acc(lhs, t, -v)
            lhs = _prune(lhs, tol, L.exact)
            r = _ket_residual(lhs, L.exact)
            if r > worst:
                worst = r
                if first is None:
                    t0 = next(iter(lhs))
                    first = (tuple(s), tuple(t0), str(lhs[t0]))
        expected = " + ".join(f"{c}*eta*{g}" for g, c in combo.items()) or "0"
        report.add(f"[{a},{b}]", worst == 0.0, worst, first, detail=f"expected {expected}")
    return report


def check_weyl_heisenberg(params: ReprParams, tol: float = 1e-10) -> Report:
    """``[b_s, b_s'^dagger] = delta_{s s'}`` on interior states."""
    ops = boson_operators(params)
    exact = params.mode == "exact"
    report = Report("weyl-heisenberg")
    states = interior_states(params.box)
    for sa in ("up", "dn"):
        for sb in ("up", "dn"):
            worst, first = 0.0, None
            for s in states:
                res = _commutator_ket(ops[f"b_{sa}"], ops[f"bd_{sb}"], s)
                if sa == sb:
                    _acc(res, s, -(ONE if exact else 1.0))
                res = _prune(res, tol, exact)
                r = _ket_residual(res, exact)
                if r > worst:
                    worst, first = r, first or tuple(s)
            report.add(f"[b_{sa},b_{sb}^+]", worst == 0.0, worst, first)
    return report


def _expand(combo: dict) -> dict:
    """Rewrite a combination of ``l+``/``l-`` into the nine-generator basis."""
    out: dict = {}
    for name, c in combo.items():
        if name == "l+":
            parts = {"l_up": 1, "l_dn": 1}
        elif name == "l-":
            parts = {"l_up": 1, "l_dn": -1}
        else:
            parts = {name: 1}
        for g, w in parts.items():
            out[g] = out.get(g, 0) + c * w
    return {g: c for g, c in out.items() if c}


def _bracket(x: dict, y: dict) -> dict:
    """Bracket of two combinations via the verified structure constants (units of eta)."""
    out: dict = {}
    for a, ca in _expand(x).items():
        for b, cb in _expand(y).items():
            if a == b:
                continue
            if (a, b) in STRUCTURE_CONSTANTS:
                sign, res = 1, STRUCTURE_CONSTANTS[(a, b)]
            else:
                sign, res = -1, STRUCTURE_CONSTANTS[(b, a)]
            for g, c in res.items():
                out[g] = out.get(g, 0) + sign * ca * cb * c
    return {g: c for g, c in out.items() if c}


def _in_span(vec: dict, span: list) -> bool:
    basis = [_expand(b) for b in span]
    names = sorted({g for b in basis for g in b} | set(vec))
    A = np.array([[b.get(g, 0) for b in basis] for g in names], dtype=float)
    y = np.array([vec.get(g, 0) for g in names], dtype=float)
    if not y.any():
        return True
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return bool(np.allclose(A @ coef, y))


def check_levi_structure(L: LaxComponents, tol: float = 1e-10) -> Report:
    """Semisimple part ``{v+, v-, l+}`` closes; radical ``{t+-, u+-, l-, l0}`` is an ideal.

    The bracket table itself is verified on the representation first, so
    the closure statements rest on checked structure constants.
    """
    report = Report("levi")
    report.extend(check_lie_algebra(L, tol), prefix="structure")
    semisimple = [{"v+": 1}, {"v-": 1}, {"l+": 1}]
    radical = [{"t+": 1}, {"t-": 1}, {"u+": 1}, {"u-": 1}, {"l-": 1}, {"l0": 1}]
    algebra = semisimple + radical
    ok = all(_in_span(_bracket(x, y), semisimple) for x in semisimple for y in semisimple)
    report.add("sl2-closure", ok)
    h, e, f = {"l+": 1}, {"v+": 1}, {"v-": 1}
    # [l+, v+-] = -+2 eta v+-, [v+, v-] = eta l+ : an sl2 triple up to rescaling
    report.add("sl2-triple", _bracket(h, e) == {"v+": -2} and _bracket(h, f) == {"v-": 2}
               and _bracket(e, f) == {"l_up": 1, "l_dn": 1})
    ok = all(_in_span(_bracket(x, r), radical) for x in algebra for r in radical)
    report.add("radical-ideal", ok)
    # l0 is central
    report.add("l0-central", all(not _bracket({"l0": 1}, x) for x in algebra))
    # radical is not nilpotent: ad(l-) acts on t+ with nonzero eigenvalue
    report.add("radical-non-nilpotent", _bracket({"l-": 1}, {"t+": 1}) == {"t+": -1})
    return report


def check_vacuum_conditions(L: LaxComponents, tol: float = 1e-12) -> Report:
    """Highest-weight conditions and the full vacuum row/column actions."""
    report = Report("vacuum")
    exact = L.exact
    one = L.one()
    eta = L.eta
    w = L.weight if L.weighted else one
    vac = {VAC: one}

    def close(got: dict, want: dict) -> float:
        diff = dict(got)
        for t, v in want.items():
            _acc(diff, t, -v)
        diff = _prune(diff, tol, exact)
        return _ket_residual(diff, exact)

    e100, e010, e110, e001 = AuxState(1, 0, 0), AuxState(0, 1, 0), AuxState(1, 1, 0), AuxState(0, 0, 1)
    ket_table = {
        (1, 1): {VAC: one}, (1, 2): {}, (1, 3): {},
        (2, 1): {e100: eta * w}, (2, 2): {VAC: w * one}, (2, 3): {},
        (3, 1): {e110: eta, e001: 2 * one - eta}, (3, 2): {e010: one}, (3, 3): {VAC: one},
    }
    bra_table = {
        (1, 1): {VAC: one}, (1, 2): {e100: one}, (1, 3): {e110: eta, e001: eta},
        (2, 1): {}, (2, 2): {VAC: w * one}, (2, 3): {e010: eta * w},
        (3, 1): {}, (3, 2): {}, (3, 3): {VAC: one},
    }
    for pos, want in ket_table.items():
        r = close(L[pos].apply(vac), {k: v for k, v in want.items() if not _is_zero(v)})
        report.add(f"L^{pos[0]}{pos[1]}|vac>", r == 0.0, r)
    for pos, want in bra_table.items():
        r = close(L[pos].apply_bra(vac), {k: v for k, v in want.items() if not _is_zero(v)})
        report.add(f"<vac|L^{pos[0]}{pos[1]}", r == 0.0, r)
    return report
