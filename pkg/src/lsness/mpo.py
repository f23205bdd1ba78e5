"""Matrix-product contraction of the Cholesky factor and the steady-state density.

Amplitudes ``<i|S_n|j> = <vac| L^{i1 j1} ... L^{in jn} |vac>`` are computed
by a depth-first sweep of an auxiliary-space bra over physical index
prefixes.  A bra component at ``(j, k, l)`` is dropped as soon as
``max(j, k, l)`` exceeds the number of remaining sites, since every Lax
component moves each lattice coordinate by at most one.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ._validation import check_chain_length, check_real, check_sector
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
from .exceptions import ConsistencyError, CutoffError, SymmetryError
from .physical import (
    PhysicalOperator,
    apply_flip,
    apply_reversal,
    apply_transpose,
    hole_counts,
    magnetizations,
)
from .report import Report
from .scalars import ONE, ZERO, ExactScalar, GaussInt

__all__ = [
    "DENSE_MAX_N",
    "DENSITY_MAX_N",
    "default_params",
    "contract_cholesky",
    "build_density",
    "project_sector",
    "grand_canonical_density",
    "grand_canonical_cholesky",
    "check_sutherland",
    "check_defining_relation",
    "check_boundary_system",
    "check_transfer_commutation",
    "check_parities",
    "wgs_contract",
    "sector_traces",
]

DENSE_MAX_N = 7
DENSITY_MAX_N = 8
_POSITIONS = [(i, j) for i in (1, 2, 3) for j in (1, 2, 3)]


def default_params(n: int, epsilon: float | None = None, **kw) -> ReprParams:
    """Representation with the default cutoff ``n`` (at least 2)."""
    return ReprParams(cutoff=max(n, 2), epsilon=epsilon, **kw)


def _lax_for(n: int, params: ReprParams | None, lax: LaxComponents | None) -> LaxComponents:
    if lax is None:
        lax = _cached_generators(params or default_params(n))
    if min(lax.box) < n // 2:
        raise CutoffError(
            f"cutoff {lax.box} cannot hold walks of {n} sites (need every axis >= {n // 2})"
        )
    return lax


@lru_cache(maxsize=64)
def _cached_generators(params: ReprParams) -> LaxComponents:
    return build_generators(params)


def _sweep(lax: LaxComponents, n: int) -> dict:
    one = lax.one()
    ops = [(i - 1, j - 1, lax[(i, j)]._by_target) for i, j in _POSITIONS]
    out: dict = {}

    def rec(x: int, I: int, J: int, bra: dict) -> None:
        left = n - x - 1
        for di, dj, rows in ops:
            nb: dict = {}
            for t, c in bra.items():
                for s, a in rows.get(t, ()):
                    if s[0] > left or s[1] > left or s[2] > left:
                        continue
                    v = c * a
                    if s in nb:
                        v = nb[s] + v
                        if v:
                            nb[s] = v
                        else:
                            del nb[s]
                    elif v:
                        nb[s] = v
            if not nb:
                continue
            I2, J2 = 3 * I + di, 3 * J + dj
            if left == 0:
                out[(I2, J2)] = nb[VAC]
            else:
                rec(x + 1, I2, J2, nb)

    rec(0, 0, 0, {VAC: one})
    return out


def contract_cholesky(n: int, params: ReprParams | None = None, *,
                      lax: LaxComponents | None = None) -> PhysicalOperator:
    """Cholesky factor ``S_n`` (un-normalized)."""
    n = check_chain_length(n)
    lax = _lax_for(n, params, lax)
    data = _sweep(lax, n)
    if lax.exact:
        return PhysicalOperator(n, data, True)
    return PhysicalOperator(n, _dict_to_csr(data, n), False)


@lru_cache(maxsize=32)
def _exact_cholesky(n: int, spin_branch: int = 1) -> PhysicalOperator:
    return contract_cholesky(n, default_params(n, spin_branch=spin_branch))


def _dict_to_csr(data: dict, n: int) -> sp.csr_matrix:
    dim = 3**n
    if not data:
        return sp.csr_matrix((dim, dim), dtype=complex)
    keys = np.array(list(data.keys()), dtype=np.int64)
    vals = np.array([complex(v) for v in data.values()], dtype=complex)
    return sp.csr_matrix((vals, (keys[:, 0], keys[:, 1])), shape=(dim, dim))


def _two_leg_sweep(vertex: VertexComponents, n: int) -> dict:
    one = ONE if vertex.exact else 1.0 + 0j
    out: dict = {}

    def rec(x: int, I: int, J: int, bra: dict) -> None:
        left = n - x - 1
        for i, j in _POSITIONS:
            nb = vertex.apply_bra(i, j, bra)
            nb = {k: v for k, v in nb.items() if max(max(k[0]), max(k[1])) <= left}
            if not nb:
                continue
            I2, J2 = 3 * I + i - 1, 3 * J + j - 1
            if left == 0:
                out[(I2, J2)] = nb[(VAC, VAC)]
            else:
                rec(x + 1, I2, J2, nb)

    rec(0, 0, 0, {(VAC, VAC): one})
    return out


def build_density(n: int, params: ReprParams | None = None, method: str = "cholesky", *,
                  lax: LaxComponents | None = None, check: bool = False,
                  tol: float = 1e-10) -> PhysicalOperator:
    """Un-normalized steady state ``rho = S S^dagger``.

    ``method="two_leg"`` contracts the doubled auxiliary space instead.
    With ``check=True`` both routes are computed and compared.
    """
    n = check_chain_length(n, maximum=DENSITY_MAX_N)
    lax = _lax_for(n, params, lax)
    if method not in ("cholesky", "two_leg"):
        raise ValueError(f"unknown method {method!r}")
    results = {}
    if method == "cholesky" or check:
        S = contract_cholesky(n, lax=lax)
        results["cholesky"] = S @ S.dagger()
    if method == "two_leg" or check:
        vertex = VertexComponents(lax, build_conjugate(lax))
        data = _two_leg_sweep(vertex, n)
        results["two_leg"] = (PhysicalOperator(n, data, True) if lax.exact
                              else PhysicalOperator(n, _dict_to_csr(data, n), False))
    if check:
        a, b = results["cholesky"], results["two_leg"]
        if lax.exact:
            if a.data != b.data:
                raise ConsistencyError("Cholesky and two-leg densities differ")
        else:
            diff = (a - b).norm()
            if diff > tol * max(a.norm(), 1.0):
                raise ConsistencyError(f"Cholesky and two-leg densities differ by {diff:.3e}")
    return results[method]


def _check_block_diagonal(op: PhysicalOperator) -> None:
    holes = hole_counts(op.n)
    if op.exact:
        bad = next(((r, c) for (r, c) in op.data if holes[r] != holes[c]), None)
    else:
        m = sp.coo_matrix(op.tosparse())
        mask = (holes[m.row] != holes[m.col]) & (m.data != 0)
        bad = (int(m.row[mask][0]), int(m.col[mask][0])) if mask.any() else None
    if bad is not None:
        raise SymmetryError(f"operator couples hole sectors at entry {bad}")


def project_sector(op: PhysicalOperator, nu: int) -> PhysicalOperator:
    """Keep the rows (and hence columns) with exactly ``nu`` holes."""
    nu = check_sector(nu, op.n)
    _check_block_diagonal(op)
    holes = hole_counts(op.n)
    if op.exact:
        return PhysicalOperator(op.n, {k: v for k, v in op.data.items() if holes[k[0]] == nu}, True)
    mask = sp.diags((holes == nu).astype(float))
    return PhysicalOperator(op.n, sp.csr_matrix(mask @ op.tosparse()), False)


def sector_traces(rho: PhysicalOperator, eps: float | None = None) -> np.ndarray:
    """``tr rho^(nu)`` for ``nu = 0..n`` (numeric)."""
    holes = hole_counts(rho.n)
    diag = rho.tosparse(eps).diagonal()
    return np.array([diag[holes == nu].sum().real for nu in range(rho.n + 1)])


def grand_canonical_cholesky(n: int, eps: float | None, mu: float | None = None,
                             cutoff: int | None = None) -> PhysicalOperator:
    """``S_n(eps, mu)`` from the chemically weighted Lax components."""
    params = ReprParams(cutoff=cutoff or max(n, 2), epsilon=eps)
    lax = apply_chemical_weight(_cached_generators(params), mu)
    return contract_cholesky(n, lax=lax)


def grand_canonical_density(n: int, eps: float | None, mu: float | None = None, *,
                            method: str = "cholesky", tol: float = 1e-10,
                            cutoff: int | None = None) -> PhysicalOperator:
    """``sum_nu exp(mu nu) rho^(nu)`` computed two ways and cross-checked.

    Route one contracts the weighted Lax components (``method`` picks the
    Cholesky or the two-leg contraction); route two sums projected sectors
    of the unweighted state.  Exact mode (``eps=None``) keeps ``z`` formal.
    """
    n = check_chain_length(n, maximum=DENSITY_MAX_N)
    exact = eps is None
    if not exact:
        eps = check_real(eps, "eps")
        mu = check_real(0.0 if mu is None else mu, "mu")
    params = ReprParams(cutoff=cutoff or max(n, 2), epsilon=eps)
    lax = _cached_generators(params)
    wlax = apply_chemical_weight(lax, mu)
    if method == "cholesky":
        S = contract_cholesky(n, lax=wlax)
        weighted = S @ S.dagger()
    else:
        vertex = VertexComponents(wlax, build_conjugate(wlax))
        data = _two_leg_sweep(vertex, n)
        weighted = (PhysicalOperator(n, data, True) if exact
                    else PhysicalOperator(n, _dict_to_csr(data, n), False))
    rho = build_density(n, lax=lax)
    holes = hole_counts(n)
    if exact:
        summed = {k: v * ExactScalar.z(2 * int(holes[k[0]])) for k, v in rho.data.items()}
        if summed != weighted.data:
            raise ConsistencyError("weighted contraction and sector sum differ")
    else:
        w = np.exp(mu * holes.astype(float))
        summed = PhysicalOperator(n, sp.csr_matrix(sp.diags(w) @ rho.tosparse()), False)
        diff = (summed - weighted).norm()
        if diff > tol * max(weighted.norm(), summed.norm(), 1e-300):
            raise ConsistencyError(f"weighted contraction and sector sum differ by {diff:.3e}")
    return weighted


# ---------------------------------------------------------------------------
# construction-level identities


def _as_lax(obj) -> LaxComponents:
    if isinstance(obj, LaxComponents):
        return obj
    return _cached_generators(obj)


def _scal(lax: LaxComponents):
    """(eps, i, eta) in the arithmetic of ``lax``."""
    if lax.exact:
        return ExactScalar.eps(), ExactScalar.const(GaussInt(0, 1)), lax.eta
    return lax.params.epsilon, 1j, lax.eta


def _vec_residual(vec: dict, exact: bool, tol: float) -> float:
    if exact:
        return float(len(vec))
    vals = [abs(v) for v in vec.values()]
    m = max(vals, default=0.0)
    return m if m > tol else 0.0


def _sub_into(out: dict, other: dict, scale=1) -> None:
    for k, v in other.items():
        w = scale * v
        if k in out:
            s = out[k] + w
            if s:
                out[k] = s
            else:
                del out[k]
        elif w:
            out[k] = w


def check_sutherland(params_or_lax, tol: float = 1e-10) -> Report:
    """Local divergence identity ``[h, L (x) L] = B_1 L_2 - L_1 B_2``.

    Written component-wise on ``e^{pq} (x) e^{rs}``:
    ``[L^{rq}, L^{ps}] = b_pp d_pq L^{rs} - b_rr d_rs L^{pq}`` with
    ``b = eta * diag(-1, 0, 1)``, checked on interior auxiliary states.
    The LHS norm is reported alongside so a vanishing ``b`` is visible.
    """
    lax = _as_lax(params_or_lax)
    _, _, eta = _scal(lax)
    bdiag = {1: -eta, 2: 0, 3: eta}
    one = lax.one()
    states = interior_states(lax.box)
    report = Report("sutherland")
    worst, lhs_max, first = 0.0, 0.0, None
    for p, q, r, s in ((p, q, r, s) for p in (1, 2, 3) for q in (1, 2, 3)
                       for r in (1, 2, 3) for s in (1, 2, 3)):
        A, B = lax[(r, q)], lax[(p, s)]
        for st in states:
            ket = {st: one}
            lhs = A.apply(B.apply(ket))
            _sub_into(lhs, B.apply(A.apply(ket)), -1)
            lhs_max = max(lhs_max, _vec_residual(lhs, lax.exact, 0.0))
            if p == q and bdiag[p]:
                _sub_into(lhs, lax[(r, s)].apply(ket), -bdiag[p])
            if r == s and bdiag[r]:
                _sub_into(lhs, lax[(p, q)].apply(ket), bdiag[r])
            res = _vec_residual(lhs, lax.exact, tol)
            if res > worst:
                worst = res
                first = first or (p, q, r, s, tuple(st))
    report.add("LOD", worst == 0.0, worst, first, detail=f"max |[h, LL]| entry {lhs_max:.3g}")
    return report


def _permute_sites(I: int, n: int, x: int) -> int:
    """Swap the labels of sites ``x`` and ``x+1`` (1-based) in basis index ``I``."""
    px, py = 3 ** (n - x), 3 ** (n - x - 1)
    a, b = (I // px) % 3, (I // py) % 3
    return I + (b - a) * px + (a - b) * py


def _hamiltonian_commutator(S: dict, n: int) -> dict:
    out: dict = {}
    for x in range(1, n):
        for (I, J), v in S.items():
            _sub_into(out, {(_permute_sites(I, n, x), J): v})
            _sub_into(out, {(I, _permute_sites(J, n, x)): v}, -1)
    return out


def _s3_tensor(S: dict, n_small: int, left: bool, scale) -> dict:
    """``s3 (x) S`` (``left``) or ``S (x) s3`` as a dict on ``n_small + 1`` sites."""
    out = {}
    block = 3**n_small
    for (I, J), v in S.items():
        for label, sign in ((1, 1), (3, -1)):
            d = label - 1
            key = (d * block + I, d * block + J) if left else (3 * I + d, 3 * J + d)
            out[key] = scale * sign * v
    return out


def check_defining_relation(n: int, params_or_lax=None, *, sector: int | None = None,
                            tol: float = 1e-10) -> Report:
    """``[H, S_n] = -eta (s3 (x) S_{n-1} - S_{n-1} (x) s3)``, optionally per hole sector."""
    n = check_chain_length(n, minimum=2)
    lax = _as_lax(params_or_lax or default_params(n))
    S = contract_cholesky(n, lax=lax)
    Sm = contract_cholesky(n - 1, lax=lax)
    if sector is not None:
        S = project_sector(S, sector)
        Sm = project_sector(Sm, min(sector, n - 1)) if sector <= n - 1 else PhysicalOperator(
            n - 1, {} if lax.exact else sp.csr_matrix((3 ** (n - 1),) * 2, dtype=complex), lax.exact)
    _, _, eta = _scal(lax)
    sd = S.data if lax.exact else S.entries()
    smd = Sm.data if lax.exact else Sm.entries()
    res = _hamiltonian_commutator(sd, n)
    _sub_into(res, _s3_tensor(smd, n - 1, True, eta))
    _sub_into(res, _s3_tensor(smd, n - 1, False, eta), -1)
    report = Report(f"defining-relation n={n}" + (f" sector={sector}" if sector is not None else ""))
    r = _vec_residual(res, lax.exact, tol)
    first = next(iter(res)) if res and r else None
    report.add("[H,S_n]", r == 0.0, r, first)
    return report


def _dissipator_matrix(A: np.ndarray, E: np.ndarray) -> np.ndarray:
    AdA = A.conj().T @ A
    return 2 * A @ E @ A.conj().T - AdA @ E - E @ AdA


def _unit(i: int, j: int) -> np.ndarray:
    e = np.zeros((3, 3), dtype=int)
    e[i - 1, j - 1] = 1
    return e


def check_boundary_system(params_or_lax=None, *, lax: LaxComponents | None = None,
                          lbar: LaxComponents | None = None, tol: float = 1e-12) -> Report:
    """Left and right boundary equations on physical (x) doubled auxiliary space.

    Left:  ``<<vac| (eps D_{A1}(LL) - i (BB1 - BB2)) = 0`` with ``A1 = e^{13}``.
    Right: ``(eps D_{A2}(LL) + i (BB1 - BB2)) |vac>> = 0`` with ``A2 = e^{31}``.
    Component ``e^{ab}`` of ``BB1`` is ``b_aa (1 (x) Lbar^{ba})`` and of ``BB2``
    is ``bbar_bb (L^{ab} (x) 1)`` with ``b = -eta s3`` and ``bbar = -b``.
    ``lbar`` defaults to the conjugate of ``lax``; passing a mismatched pair
    is how the negative control is run.
    """
    if lax is None:
        lax = _as_lax(params_or_lax or ReprParams(cutoff=3))
    if lbar is None:
        lbar = build_conjugate(lax)
    vertex = VertexComponents(lax, lbar)
    eps, i_unit, eta = _scal(lax)
    one = lax.one()
    b = {1: -eta, 2: 0 * one, 3: eta}
    bbar = {k: -v for k, v in b.items()}
    A1, A2 = _unit(1, 3), _unit(3, 1)
    vv = {(VAC, VAC): one}
    report = Report("boundary-system")
    for side, A, sign in (("left", A1, -1), ("right", A2, +1)):
        worst, first = 0.0, None
        d = {(i, j): _dissipator_matrix(A, _unit(i, j)) for i in (1, 2, 3) for j in (1, 2, 3)}
        for a in (1, 2, 3):
            for c in (1, 2, 3):
                vec: dict = {}
                for (i, j), dm in d.items():
                    coeff = int(dm[a - 1, c - 1])
                    if coeff:
                        part = (vertex.apply_bra(i, j, vv) if side == "left" else vertex.apply_ket(i, j, vv))
                        _sub_into(vec, part, eps * coeff)
                # BB1: b_aa (1 (x) Lbar^{ca});  BB2: bbar_cc (L^{ac} (x) 1)
                if b[a]:
                    leg = lbar[(c, a)]
                    part = ({(VAC, s): v for s, v in leg.row(VAC)} if side == "left"
                            else {(VAC, t): v for t, v in leg.column(VAC)})
                    _sub_into(part_scaled := {}, part)
                    _sub_into(vec, part_scaled, sign * i_unit * b[a])
                if bbar[c]:
                    leg = lax[(a, c)]
                    part = ({(s, VAC): v for s, v in leg.row(VAC)} if side == "left"
                            else {(t, VAC): v for t, v in leg.column(VAC)})
                    _sub_into(vec, part, -sign * i_unit * bbar[c])
                r = _vec_residual(vec, lax.exact, tol)
                if r > worst:
                    worst, first = r, first or (a, c)
        report.add(side, worst == 0.0, worst, first)
    return report


# ---------------------------------------------------------------------------
# transfer-matrix commutation


def _gauss_matrix(S: PhysicalOperator, value: Fraction, degree: int) -> dict:
    num, den = value.numerator, value.denominator
    out = {}
    for k, v in S.data.items():
        g = v.eval_scaled(num, den, degree)
        if g:
            out[k] = (g.re, g.im)
    return out


def _gauss_matmul(a: dict, b: dict) -> dict:
    by_row: dict = {}
    for (k, c), v in b.items():
        by_row.setdefault(k, []).append((c, v))
    out: dict = {}
    for (r, k), (ar, ai) in a.items():
        for c, (br, bi) in by_row.get(k, ()):
            re, im = ar * br - ai * bi, ar * bi + ai * br
            key = (r, c)
            if key in out:
                o = out[key]
                out[key] = (o[0] + re, o[1] + im)
            else:
                out[key] = (re, im)
    return out


def check_transfer_commutation(n: int, eps, eps2, *, mu: float = 0.0, mu2: float = 0.0,
                               mode: str = "exact", tol: float = 1e-11, max_n: int = 7) -> Report:
    """``[S_n(eps, mu), S_n(eps2, mu2)] = 0``.

    Exact mode evaluates the exact polynomial factor at rational couplings
    (scaled to Gaussian integers) and requires an identically zero
    commutator.  Numeric mode reports ``||[A, B]||_F / (||A||_F ||B||_F)``.
    """
    n = check_chain_length(n, maximum=max_n)
    report = Report(f"transfer-commutation n={n}")
    if mode == "exact":
        if mu or mu2:
            raise ValueError("exact mode supports mu = 0 only; use mode='numeric'")
        e1, e2 = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps), \
            Fraction(str(eps2)) if isinstance(eps2, float) else Fraction(eps2)
        S = _exact_cholesky(n)
        A, B = _gauss_matrix(S, e1, n), _gauss_matrix(S, e2, n)
        ab, ba = _gauss_matmul(A, B), _gauss_matmul(B, A)
        diff = {}
        for k in set(ab) | set(ba):
            x, y = ab.get(k, (0, 0)), ba.get(k, (0, 0))
            if x != y:
                diff[k] = (x[0] - y[0], x[1] - y[1])
        first = next(iter(sorted(diff))) if diff else None
        report.add("commutator", not diff, float(len(diff)), first,
                   detail=f"eps={e1}, eps'={e2}, nnz(S)={len(S.data)}")
        return report
    A = grand_canonical_cholesky(n, check_real(eps, "eps"), mu).tosparse()
    B = grand_canonical_cholesky(n, check_real(eps2, "eps2"), mu2).tosparse()
    from scipy.sparse.linalg import norm as sparse_norm

    c = sparse_norm(A @ B - B @ A) / (sparse_norm(A) * sparse_norm(B))
    report.add("commutator", c <= tol, c, detail=f"eps={eps}, mu={mu}; eps'={eps2}, mu'={mu2}")
    return report


# ---------------------------------------------------------------------------
# parities


def check_parities(n: int, eps: float | None = None, tol: float = 1e-12) -> Report:
    """``RS rho = rho``, ``RS S = S``, ``TS S = S`` and the charge support of ``rho``."""
    n = check_chain_length(n)
    S = _exact_cholesky(n) if eps is None else contract_cholesky(n, default_params(n, eps))
    rho = S @ S.dagger()
    report = Report(f"parities n={n}")

    def same(a: PhysicalOperator, b: PhysicalOperator) -> float:
        if a.exact:
            return 0.0 if a.data == b.data else float(len(set(a.data.items()) ^ set(b.data.items())))
        d = (a - b).norm() / max(b.norm(), 1e-300)
        return d if d > tol else 0.0

    for name, got, want in (
        ("RS rho", apply_reversal(apply_flip(rho)), rho),
        ("RS S", apply_reversal(apply_flip(S)), S),
        ("TS S", apply_transpose(apply_flip(S)), S),
    ):
        r = same(got, want)
        report.add(name, r == 0.0, r)
    holes, mag = hole_counts(n), magnetizations(n)
    keys = list(rho.data) if rho.exact else list(rho.entries())
    bad_h = sum(1 for r, c in keys if holes[r] != holes[c])
    bad_m = sum(1 for r, c in keys if mag[r] != mag[c])
    report.add("[rho,N0]=0", bad_h == 0, bad_h)
    report.add("[rho,M]=0", bad_m == 0, bad_m)
    return report


# ---------------------------------------------------------------------------
# walking graph states


def _wgs_edges(p: tuple, eta, one) -> list:
    """Edges leaving vertex ``p`` as ``(i, j, q, amplitude)``; amplitude is ``<p|L^{ij}|q>``."""
    j, k, l = p
    e = [
        (1, 1, p, one + eta * (j + l)),
        (2, 2, p, one),
        (3, 3, p, one + eta * (k + l)),
        (1, 2, (j + 1, k, l), one * (j + 1)),
        (2, 3, (j, k + 1, l), eta * (k + 1)),
        (1, 3, (j + 1, k + 1, l), eta * ((j + 1) * (k + 1))),
        (1, 3, (j, k, l + 1), eta * (l + 1)),
    ]
    if j >= 1:
        e.append((2, 1, (j - 1, k, l), eta))
    if k >= 1:
        e.append((3, 2, (j, k - 1, l), one))
    if j >= 1 and k >= 1:
        e.append((3, 1, (j - 1, k - 1, l), eta))
    if l >= 1:
        e.append((3, 1, (j, k, l - 1), 2 * one - eta + eta * (l - 1)))
    return e


def wgs_contract(n: int, eps: float | None = None, max_n: int = 7) -> PhysicalOperator:
    """``S_n`` as a sum over closed walks of length ``n`` on the lattice octant.

    Edge amplitudes are written out directly from the boson and Verma
    matrix elements in the monomial basis; no Lax operator objects are used.
    """
    n = check_chain_length(n, maximum=max_n)
    exact = eps is None
    eta = ExactScalar.eta() if exact else 1j * check_real(eps, "eps")
    one = ONE if exact else 1.0 + 0j
    out: dict = {}
    cache: dict = {}

    def edges(p):
        if p not in cache:
            cache[p] = _wgs_edges(p, eta, one)
        return cache[p]

    def walk(x: int, p: tuple, I: int, J: int, amp) -> None:
        left = n - x - 1
        for i, j, q, a in edges(p):
            if max(q) > left or not a:
                continue
            v = amp * a
            I2, J2 = 3 * I + i - 1, 3 * J + j - 1
            if left == 0:
                key = (I2, J2)
                s = out.get(key, ZERO if exact else 0j) + v
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
            else:
                walk(x + 1, q, I2, J2, v)

    walk(0, (0, 0, 0), 0, 0, one)
    if exact:
        return PhysicalOperator(n, out, True)
    return PhysicalOperator(n, _dict_to_csr(out, n), False)
