"""Expectation values evaluated in the doubled auxiliary space.

The transfer vertex ``T = sum_i LL^{ii}`` and the images ``Lambda(X)`` of
local observables are assembled as sparse matrices over pairs of truncated
lattice states.  Every Lax component shifts the charges ``j - k`` and
``j + k + 2l`` of its leg by amounts that depend only on the component, so
``T`` keeps both legs' charges equal.  With ``reduced=True`` only doubled
states satisfying

    j - k = jb - kb,    j + k + 2l = jb + kb + 2lb

are allocated.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

from ._validation import check_chain_length, check_local_operator, check_real
from .auxrep import (
    VAC,
    AuxState,
    LaxComponents,
    ReprParams,
    VertexComponents,
    apply_chemical_weight,
    build_conjugate,
    build_generators,
    interior_states,
)
from .exceptions import SizeLimitError
from .report import Report
from .scalars import ONE, ExactScalar

__all__ = [
    "TransferSpace",
    "transfer_space",
    "partition_function",
    "partition_function_exact",
    "sector_partition_functions",
    "local_expectation",
    "local_expectation_physical",
    "current_expectation",
    "current_profile",
    "doping",
    "density_profile",
    "check_aux_symmetries",
    "reachable_states",
    "scaling_fit",
    "ScalingFitResult",
    "current_matrix",
    "record",
]

SCHEMA_VERSION = 1
OBSERVABLE_MAX_N = 24
_SPECIES_CHARGE = {"K+": (1, 0, -1), "K-": (1, 0, 1)}


def _leg_keys(states: list) -> np.ndarray:
    """Integer encoding of the charges ``(j - k, j + k + 2l)`` of each leg state."""
    a = np.array([s[0] - s[1] for s in states])
    b = np.array([s[0] + s[1] + 2 * s[2] for s in states])
    return (a - a.min()) * (b.max() + 1) + b


class TransferSpace:
    """Sparse doubled-space vertex operators at fixed ``(eps, mu)``."""

    def __init__(self, n: int, eps: float, mu: float = 0.0, *, reduced: bool = True,
                 cutoff: int | None = None, spin_branch: int = 1):
        self.n = check_chain_length(n, maximum=OBSERVABLE_MAX_N)
        self.eps = check_real(eps, "eps")
        self.mu = check_real(mu, "mu")
        self.reduced = reduced
        self.cutoff = cutoff or n // 2 + 1
        params = ReprParams(cutoff=self.cutoff, epsilon=self.eps, spin_branch=spin_branch)
        lax = apply_chemical_weight(build_generators(params), self.mu)
        lbar = build_conjugate(lax)
        self.leg_states = params.states()
        index = {s: i for i, s in enumerate(self.leg_states)}
        self._A = {pos: lax[pos].to_sparse(index) for pos, _ in lax.items()}
        self._B = {pos: lbar[pos].to_sparse(index) for pos, _ in lbar.items()}
        D = len(self.leg_states)
        self.leg_dim = D
        if reduced:
            keys = _leg_keys(self.leg_states)
            pairs = np.flatnonzero((keys[:, None] == keys[None, :]).ravel())
        else:
            pairs = np.arange(D * D)
        self.pairs = pairs
        self._slot = np.full(D * D, -1, dtype=np.int64)
        self._slot[pairs] = np.arange(len(pairs))
        self.dim = len(pairs)
        self.vac = int(self._slot[index[VAC] * D + index[VAC]])
        self._vertex: dict = {}
        self._powers_left: list | None = None
        self._powers_right: list | None = None

    # -- assembly -----------------------------------------------------
    def pair_operator(self, A: sp.spmatrix, B: sp.spmatrix) -> sp.csr_matrix:
        """``A (x) B`` restricted to the allocated doubled states."""
        A, B = sp.coo_matrix(A), sp.coo_matrix(B)
        D = self.leg_dim
        rows = (A.row[:, None] * D + B.row[None, :]).ravel()
        cols = (A.col[:, None] * D + B.col[None, :]).ravel()
        vals = (A.data[:, None] * B.data[None, :]).ravel()
        r, c = self._slot[rows], self._slot[cols]
        keep = (r >= 0) & (c >= 0)
        return sp.csr_matrix((vals[keep], (r[keep], c[keep])), shape=(self.dim, self.dim))

    def vertex(self, i: int, j: int) -> sp.csr_matrix:
        """``LL^{ij} = sum_k L^{ik} (x) Lbar^{jk}``."""
        if (i, j) not in self._vertex:
            self._vertex[(i, j)] = sum(
                self.pair_operator(self._A[(i, k)], self._B[(j, k)]) for k in (1, 2, 3))
        return self._vertex[(i, j)]

    @property
    def transfer(self) -> sp.csr_matrix:
        if "T" not in self._vertex:
            self._vertex["T"] = sp.csr_matrix(sum(self.vertex(i, i) for i in (1, 2, 3)))
        return self._vertex["T"]

    def image(self, X) -> sp.csr_matrix:
        """``Lambda(X) = sum_{I,J} X_{J,I} LL^{i1 j1} ... LL^{il jl}`` for an ``l``-site ``X``.

        The leg products are formed before restriction, so intermediate
        states that break the charge constraints are kept.
        """
        X, ell = _support(X)
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        rows, cols = np.nonzero(X)
        for J, I in zip(rows, cols):
            labels_i = _labels(I, ell)
            labels_j = _labels(J, ell)
            for K in itertools.product((1, 2, 3), repeat=ell):
                A = _chain(self._A, labels_i, K)
                B = _chain(self._B, labels_j, K)
                if A.nnz and B.nnz:
                    out = out + X[J, I] * self.pair_operator(A, B)
        return out

    # -- contraction --------------------------------------------------
    def left_vectors(self) -> list:
        """``<<vac| T^k`` for ``k = 0..n``."""
        if self._powers_left is None:
            v = np.zeros(self.dim, dtype=complex)
            v[self.vac] = 1.0
            T = self.transfer
            out = [v]
            for _ in range(self.n):
                v = T.T @ v
                out.append(v)
            self._powers_left = out
        return self._powers_left

    def right_vectors(self) -> list:
        """``T^k |vac>>`` for ``k = 0..n``."""
        if self._powers_right is None:
            v = np.zeros(self.dim, dtype=complex)
            v[self.vac] = 1.0
            T = self.transfer
            out = [v]
            for _ in range(self.n):
                v = T @ v
                out.append(v)
            self._powers_right = out
        return self._powers_right

    def partition_function(self) -> float:
        return float(self.left_vectors()[self.n][self.vac].real)

    def sandwich(self, op: sp.spmatrix, x: int, ell: int) -> complex:
        """``<<vac| T^{x-1} op T^{n-x-ell+1} |vac>>``."""
        left = self.left_vectors()[x - 1]
        right = self.right_vectors()[self.n - x - ell + 1]
        return complex(left @ (op @ right))


def _support(X) -> tuple:
    X = check_local_operator(X)
    return X, round(math.log(X.shape[0], 3))


def _labels(idx: int, ell: int) -> tuple:
    out = []
    for _ in range(ell):
        idx, r = divmod(int(idx), 3)
        out.append(r + 1)
    return tuple(reversed(out))


def _chain(mats: dict, rows: tuple, cols: tuple) -> sp.csr_matrix:
    out = mats[(rows[0], cols[0])]
    for a, b in zip(rows[1:], cols[1:]):
        out = out @ mats[(a, b)]
    return sp.csr_matrix(out)


@lru_cache(maxsize=128)
def transfer_space(n: int, eps: float, mu: float = 0.0, reduced: bool = True,
                   cutoff: int | None = None) -> TransferSpace:
    return TransferSpace(n, eps, mu, reduced=reduced, cutoff=cutoff)


# ---------------------------------------------------------------------------
# partition functions


def partition_function(n: int, eps: float, mu: float = 0.0, *, reduced: bool = True,
                       cutoff: int | None = None) -> float:
    """``Z_n(eps, mu) = <<vac| T^n |vac>>``."""
    return transfer_space(n, float(eps), float(mu), reduced, cutoff).partition_function()


def partition_function_exact(n: int) -> ExactScalar:
    """``Z_n`` as a polynomial in ``eps`` and ``z = exp(mu/2)`` (dict sweep, small ``n``)."""
    n = check_chain_length(n, maximum=8)
    params = ReprParams(cutoff=max(n // 2, 1))
    lax = apply_chemical_weight(build_generators(params))
    vertex = VertexComponents(lax, build_conjugate(lax))
    bra = {(VAC, VAC): ONE}
    for x in range(n):
        left = n - x - 1
        bra = {k: v for k, v in vertex.transfer_bra(bra).items()
               if max(max(k[0]), max(k[1])) <= left}
    return bra.get((VAC, VAC), ExactScalar.const(0))


def sector_partition_functions(n: int, eps: float, *, reduced: bool = True) -> np.ndarray:
    """``tr rho^(nu)`` for ``nu = 0..n``, from a hole-graded transfer sweep.

    ``LL^{22}`` is the only vertex that adds a hole, so the frontier is
    split by the number of ``LL^{22}`` factors applied so far.
    """
    ts = transfer_space(n, float(eps), 0.0, reduced)
    T2 = ts.vertex(2, 2)
    T0 = ts.vertex(1, 1) + ts.vertex(3, 3)
    v = np.zeros((n + 1, ts.dim), dtype=complex)
    v[0, ts.vac] = 1.0
    for _ in range(n):
        w = (T0.T @ v.T).T
        w[1:] += (T2.T @ v[:-1].T).T
        v = w
    return v[:, ts.vac].real


# ---------------------------------------------------------------------------
# local observables


def current_matrix(i: int, j: int) -> np.ndarray:
    """Two-site ``J^{ij} = i (e^{ij} (x) e^{ji} - e^{ji} (x) e^{ij})``."""
    def unit(a, b):
        m = np.zeros((3, 3))
        m[a - 1, b - 1] = 1
        return m

    return 1j * (np.kron(unit(i, j), unit(j, i)) - np.kron(unit(j, i), unit(i, j)))


def local_expectation(X, x: int, n: int, eps: float, mu: float = 0.0, *,
                      reduced: bool = True) -> complex:
    """Normalized ``<X_{[x, x+l-1]}>`` in the steady state ``rho(eps, mu)``."""
    X, ell = _support(X)
    n = check_chain_length(n)
    if not (1 <= x and x + ell - 1 <= n):
        raise ValueError(f"support [{x}, {x + ell - 1}] outside the chain 1..{n}")
    ts = transfer_space(n, float(eps), float(mu), reduced)
    return ts.sandwich(ts.image(X), x, ell) / ts.partition_function()


def local_expectation_physical(X, x: int, n: int, eps: float, mu: float = 0.0) -> complex:
    """``tr(X rho) / tr(rho)`` with ``rho`` from the physical-space contraction."""
    from .mpo import DENSITY_MAX_N, grand_canonical_density
    from .physical import local_operator

    X, ell = _support(X)
    if n > DENSITY_MAX_N:
        raise SizeLimitError(f"physical route limited to n <= {DENSITY_MAX_N}")
    rho = grand_canonical_density(n, float(eps), float(mu)).tosparse()
    Xf = local_operator(X, x, n)
    return complex((Xf @ rho).diagonal().sum() / rho.diagonal().sum())


def current_expectation(i: int, j: int, x: int, n: int, eps: float, mu: float = 0.0, *,
                        reduced: bool = True) -> float:
    """``<J^{ij}_{x,x+1}>`` from the current vertex ``i (LL^{ji} LL^{ij} - LL^{ij} LL^{ji})``.

    A species total ``J^i`` is obtained by summing over ``j``.
    """
    ts = transfer_space(n, float(eps), float(mu), reduced)
    return float(ts.sandwich(ts.image(current_matrix(i, j)), x, 2).real / ts.partition_function())


def current_profile(i: int, n: int, eps: float, mu: float = 0.0, j: int | None = None) -> np.ndarray:
    """``<J^{i}_{x,x+1}>`` (or ``<J^{ij}>``) on every bond ``x = 1..n-1``."""
    js = (1, 2, 3) if j is None else (j,)
    return np.array([sum(current_expectation(i, jj, x, n, eps, mu) for jj in js)
                     for x in range(1, n)])


def density_profile(species: int, n: int, eps: float, mu: float = 0.0) -> np.ndarray:
    """``<e^{ss}_x>`` for ``x = 1..n``."""
    e = np.zeros((3, 3))
    e[species - 1, species - 1] = 1
    return np.array([local_expectation(e, x, n, eps, mu).real for x in range(1, n + 1)])


def doping(n: int, eps: float, mu: float = 0.0, *, h: float = 1e-5,
           tol: float | None = None) -> dict:
    """Hole filling ``r = n^-1 d/dmu log Z_n`` by two routes.

    ``sector`` uses ``sum nu e^{mu nu} Z^(nu) / (n sum e^{mu nu} Z^(nu))``;
    ``difference`` differentiates ``log Z_n`` by a central difference.
    ``agree`` compares them at ``tol`` (default ``1e-6``, the differencing budget).
    """
    n = check_chain_length(n)
    mu = check_real(mu, "mu")
    zs = sector_partition_functions(n, eps)
    nus = np.arange(n + 1)
    logw = mu * nus + np.log(np.maximum(zs, np.finfo(float).tiny))
    r_sector = float(np.exp(logsumexp(logw, b=nus) - logsumexp(logw)) / n)
    zp = partition_function(n, eps, mu + h)
    zm = partition_function(n, eps, mu - h)
    r_diff = float((math.log(zp) - math.log(zm)) / (2 * h) / n)
    tol = 1e-6 if tol is None else tol
    return {"sector": r_sector, "difference": r_diff,
            "agree": abs(r_sector - r_diff) <= tol, "sector_traces": zs.tolist()}


# ---------------------------------------------------------------------------
# symmetries


def _charge_residual(vertex: VertexComponents, K: dict, states: list, exact: bool,
                     pos: tuple, expect_factor) -> float:
    """Max entry of ``[LL^{ij}, K] - expect_factor * LL^{ij}`` on ``states``."""
    i, j = pos
    worst = 0.0
    for st in states:
        ket = {st: ONE if exact else 1.0 + 0j}
        a = vertex.apply_ket(i, j, {k: v * K[k] for k, v in ket.items()})
        b = vertex.apply_ket(i, j, ket)
        diff = dict(a)
        for k, v in b.items():
            w = -(K[k] * v) - expect_factor * v
            s = diff.get(k, 0 * w) + w
            if s:
                diff[k] = s
            else:
                diff.pop(k, None)
        if exact:
            worst = max(worst, float(len(diff)))
        else:
            worst = max(worst, max((abs(v) for v in diff.values()), default=0.0))
    return worst


def _doubled_charges(lax: LaxComponents, states: list) -> dict:
    """``K+ = l+ (x) 1 + 1 (x) lbar+`` and ``K- = l- (x) 1 + 1 (x) lbar-`` on doubled states.

    ``l+ = l_up + l_dn`` and ``l- = l_up - l_dn`` are read off the diagonal
    components, so both legs use their own couplings.
    """
    lbar = build_conjugate(lax)
    out = {"K+": {}, "K-": {}}
    for s, sb in states:
        up, dn = lax[(1, 1)].entry(s, s), lax[(3, 3)].entry(s, s)
        upb, dnb = lbar[(1, 1)].entry(sb, sb), lbar[(3, 3)].entry(sb, sb)
        out["K+"][(s, sb)] = up + dn + upb + dnb
        out["K-"][(s, sb)] = up - dn + upb - dnb
    return out


def reachable_states(vertex: VertexComponents, steps: int) -> set:
    """Doubled states reached from the doubled vacuum by ``T^m``, ``m <= steps``."""
    seen = {(VAC, VAC)}
    frontier = {(VAC, VAC): vertex.L.one()}
    for _ in range(steps):
        frontier = vertex.transfer_bra(frontier)
        seen |= set(frontier)
    return seen


def check_aux_symmetries(params: ReprParams | None = None, *, steps: int = 3,
                         tol: float = 1e-10, literal_constraint: bool = False) -> Report:
    """U(1) identities for ``L`` and ``LL``, ``[T, K+-] = 0`` and the reachability constraints.

    ``literal_constraint=True`` additionally tests ``j + k - 2l = jb + kb - 2lb``,
    which is not conserved and is expected to fail.
    """
    params = params or ReprParams(cutoff=4)
    lax = build_generators(params)
    exact = lax.exact
    eta = lax.eta
    report = Report("aux-symmetries")
    s3 = {1: 1, 2: 0, 3: -1}
    one = lax.one()

    # [L^{ij}, l+] = eta (s3_ii - s3_jj) L^{ij} on interior states
    lplus = {s: lax[(1, 1)].entry(s, s) + lax[(3, 3)].entry(s, s) for s in params.states()}
    worst = 0.0
    for (i, j), op in lax.items():
        for st in interior_states(lax.box, 1):
            a = op.apply({st: lplus[st]})
            b = op.apply({st: one})
            diff = dict(a)
            for k, v in b.items():
                w = -(lplus[k] * v) - eta * (s3[i] - s3[j]) * v
                s = diff.get(k, 0 * w) + w
                if s:
                    diff[k] = s
                else:
                    diff.pop(k, None)
            worst = max(worst, float(len(diff)) if exact else max((abs(v) for v in diff.values()), default=0.0))
    report.add("U(1) for L", worst <= (0 if exact else tol), worst)

    vertex = VertexComponents(lax, build_conjugate(lax))
    inner = interior_states(lax.box, 1)
    dstates = [(s, sb) for s in inner for sb in inner]
    allstates = [(s, sb) for s in params.states() for sb in params.states()]
    charges = _doubled_charges(lax, allstates)
    for name, q in _SPECIES_CHARGE.items():
        worst_ll, worst_t = 0.0, 0.0
        for i in (1, 2, 3):
            for j in (1, 2, 3):
                r = _charge_residual(vertex, charges[name], dstates, exact, (i, j),
                                     eta * (q[i - 1] - q[j - 1]))
                worst_ll = max(worst_ll, r)
        # [T, K] with T = sum_i LL^{ii}
        for st in dstates:
            ket = {st: one}
            a = {}
            b = {}
            for i in (1, 2, 3):
                for k, v in vertex.apply_ket(i, i, {st: charges[name][st]}).items():
                    a[k] = a.get(k, 0 * v) + v
                for k, v in vertex.apply_ket(i, i, ket).items():
                    b[k] = b.get(k, 0 * v) + charges[name][k] * v
            diff = {k: a.get(k, 0 * one) - b.get(k, 0 * one) for k in set(a) | set(b)}
            diff = {k: v for k, v in diff.items() if v}
            r = float(len(diff)) if exact else max((abs(v) for v in diff.values()), default=0.0)
            worst_t = max(worst_t, r)
        lim = 0 if exact else tol
        report.add(f"U(1) for LL via {name}", worst_ll <= lim, worst_ll)
        report.add(f"[T,{name}]=0", worst_t <= lim, worst_t)

    reach = reachable_states(vertex, steps)
    bad_a = [st for st in reach if st[0][0] - st[0][1] != st[1][0] - st[1][1]]
    bad_b = [st for st in reach if st[0][0] + st[0][1] + 2 * st[0][2] != st[1][0] + st[1][1] + 2 * st[1][2]]
    report.add("reachable j-k = jb-kb", not bad_a, len(bad_a), bad_a[0] if bad_a else None,
               detail=f"{len(reach)} states after T^{steps}")
    report.add("reachable j+k+2l = jb+kb+2lb", not bad_b, len(bad_b), bad_b[0] if bad_b else None)
    if literal_constraint:
        bad_c = [st for st in reach if st[0][0] + st[0][1] - 2 * st[0][2] != st[1][0] + st[1][1] - 2 * st[1][2]]
        report.add("reachable j+k-2l = jb+kb-2lb", not bad_c, len(bad_c), bad_c[0] if bad_c else None)
    return report


# ---------------------------------------------------------------------------
# scaling


@dataclass
class ScalingFitResult:
    eps: float
    mu: float
    n_values: list
    log_z: list
    alpha: float
    beta1: float
    intercept: float
    residuals: list
    current_ratio: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.eps,
            "mu": self.mu,
            "n": self.n_values,
            "log_z": self.log_z,
            "alpha": self.alpha,
            "beta1": self.beta1,
            "intercept": self.intercept,
            "residuals": self.residuals,
            "current_ratio": self.current_ratio,
        }


def scaling_fit(eps: float, mu: float, n_range, *, intercept: bool = True,
                with_currents: bool = False) -> ScalingFitResult:
    """Least squares of ``log Z_n`` on ``{n, n log n}`` (plus a constant by default).

    Descriptive only.  With ``with_currents`` the ratio
    ``<J^1> Z_n / Z_{n-1}`` is reported for every ``n`` after the first.
    """
    from .estimator import ScalingFit

    ns = sorted(int(n) for n in n_range)
    if len(ns) < 4:
        raise ValueError("scaling fit needs at least 4 chain lengths")
    logz = [math.log(partition_function(n, eps, mu)) for n in ns]
    est = ScalingFit(intercept=intercept).fit(ns, logz)
    ratios = []
    if with_currents:
        for n in ns:
            if n >= 2:
                j1 = sum(current_expectation(1, j, 1, n, eps, mu) for j in (1, 2, 3))
                ratios.append(j1 * partition_function(n, eps, mu) / partition_function(n - 1, eps, mu))
    return ScalingFitResult(float(eps), float(mu), ns, logz, est.alpha_, est.beta1_,
                            est.intercept_, est.residuals_.tolist(), ratios)


def record(n: int, eps: float, mu: float, observable: str, value, sites=None, **extra) -> dict:
    """One JSON-ready observable row."""
    v = complex(value)
    row = {"n": n, "epsilon": eps, "mu": mu, "observable": observable,
           "sites": sites, "value_re": v.real, "value_im": v.imag}
    row.update(extra)
    return row
