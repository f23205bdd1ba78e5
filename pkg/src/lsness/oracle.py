"""Brute-force Lindblad oracle on the physical space.

Vectorization is row-major: ``vec(rho)[a * d + b] = rho[a, b]`` and
``vec(X rho Y) = (X (x) Y^T) vec(rho)``.  Everything that turns operator
products into superoperators goes through :func:`sandwich`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._validation import check_chain_length, check_real
from .exceptions import DegeneracyError, SizeLimitError
from .physical import (
    PhysicalOperator,
    apply_flip,
    apply_reversal,
    apply_transpose,
    hole_counts,
    local_operator,
    magnetizations,
)
from .report import Report

__all__ = [
    "ORACLE_MAX_N",
    "LindbladModel",
    "Superoperator",
    "sandwich",
    "unit",
    "spin_one",
    "build_hamiltonian",
    "check_hamiltonian_forms",
    "build_model",
    "build_dissipator",
    "build_liouvillian",
    "apply_liouvillian",
    "liouvillian_residual",
    "sector_indices",
    "sector_liouvillian",
    "steady_states",
    "kernel_dimensions",
    "offdiagonal_kernel_dimensions",
    "build_currents",
    "build_symmetry_maps",
    "check_oracle_invariants",
    "xxx_steady_state",
    "no_hole_indices",
    "sector_dimension",
]

ORACLE_MAX_N = 5
DENSE_SVD_MAX = 2500


def unit(i: int, j: int, d: int = 3) -> np.ndarray:
    e = np.zeros((d, d))
    e[i - 1, j - 1] = 1.0
    return e


def spin_one() -> tuple:
    """``(s1, s2, s3)`` for spin 1 in the basis ``|1> = up, |2> = 0, |3> = down``."""
    sp_ = np.sqrt(2) * (unit(1, 2) + unit(2, 3))
    sm = sp_.T
    return (sp_ + sm) / 2, (sp_ - sm) / 2j, np.diag([1.0, 0.0, -1.0])


def _permutation_matrix(d: int) -> np.ndarray:
    P = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            P[j * d + i, i * d + j] = 1.0
    return P


def build_hamiltonian(n: int, form: str = "permutation") -> PhysicalOperator:
    """``H = sum_x h_{x,x+1}``; ``form="spin"`` builds ``h = s.s + (s.s)^2 - 1``."""
    n = check_chain_length(n, minimum=2)
    if form == "permutation":
        h = _permutation_matrix(3)
    elif form == "spin":
        ss = sum(np.kron(s, s) for s in spin_one())
        h = (ss + ss @ ss - np.eye(9)).real
    else:
        raise ValueError(f"unknown form {form!r}")
    H = sum(local_operator(h, x, n) for x in range(1, n))
    return PhysicalOperator(n, sp.csr_matrix(H, dtype=complex), False)


def check_hamiltonian_forms(n: int = 2, tol: float = 1e-12) -> Report:
    a, b = build_hamiltonian(n), build_hamiltonian(n, "spin")
    r = (a - b).norm()
    report = Report(f"hamiltonian n={n}")
    report.add("permutation == spin form", r <= tol, r)
    return report


@dataclass(frozen=True)
class LindbladModel:
    n: int
    eps: float
    H: PhysicalOperator
    jumps: tuple


def build_model(n: int, eps: float) -> LindbladModel:
    """Lai-Sutherland chain with ``A1 = e^{13}`` on site 1 and ``A2 = e^{31}`` on site n."""
    n = check_chain_length(n, minimum=2)
    eps = check_real(eps, "eps")
    A1 = PhysicalOperator(n, sp.csr_matrix(local_operator(unit(1, 3), 1, n), dtype=complex))
    A2 = PhysicalOperator(n, sp.csr_matrix(local_operator(unit(3, 1), n, n), dtype=complex))
    return LindbladModel(n, eps, build_hamiltonian(n), (A1, A2))


@dataclass(frozen=True)
class Superoperator:
    dim: int
    matrix: sp.csr_matrix

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho)
        return (self.matrix @ rho.reshape(-1)).reshape(rho.shape)

    def __add__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.dim, self.matrix + other.matrix)

    def scale(self, c) -> "Superoperator":
        return Superoperator(self.dim, c * self.matrix)


def sandwich(X, Y) -> sp.csr_matrix:
    """Superoperator of ``rho -> X rho Y`` under row-major vectorization."""
    return sp.kron(sp.csr_matrix(X), sp.csr_matrix(Y).T, format="csr")


def _dissipator_matrix(A, B=None) -> sp.csr_matrix:
    """``rho -> 2 A rho B^dag - A^dag A rho - rho B^dag B`` with ``B`` defaulting to ``A``."""
    A = sp.csr_matrix(A)
    B = A if B is None else sp.csr_matrix(B)
    Ia = sp.identity(A.shape[0], format="csr")
    Ib = sp.identity(B.shape[0], format="csr")
    AdA = A.conj().T @ A
    BdB = B.conj().T @ B
    return 2 * sandwich(A, B.conj().T) - sandwich(AdA, Ib) - sandwich(Ia, BdB)


def build_dissipator(A) -> Superoperator:
    """``D_A(rho) = 2 A rho A^dag - {A^dag A, rho}``."""
    if isinstance(A, PhysicalOperator):
        A = A.tosparse()
    A = sp.csr_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError("jump operator must be square")
    return Superoperator(A.shape[0], _dissipator_matrix(A))


def _block_liouvillian(H_r, H_c, jumps_r, jumps_c, eps: float) -> sp.csr_matrix:
    """Liouvillian restricted to operators ``|row block><col block|``."""
    Ir = sp.identity(H_r.shape[0], format="csr")
    Ic = sp.identity(H_c.shape[0], format="csr")
    L = -1j * (sandwich(H_r, Ic) - sandwich(Ir, H_c))
    for Ar, Ac in zip(jumps_r, jumps_c):
        L = L + eps * _dissipator_matrix(Ar, Ac)
    return sp.csr_matrix(L)


def build_liouvillian(model: LindbladModel) -> Superoperator:
    n = model.n
    if n > ORACLE_MAX_N:
        raise SizeLimitError(f"full superoperator limited to n <= {ORACLE_MAX_N}")
    H = model.H.tosparse()
    jumps = [A.tosparse() for A in model.jumps]
    return Superoperator(3**n, _block_liouvillian(H, H, jumps, jumps, model.eps))


def apply_liouvillian(model: LindbladModel, rho) -> sp.csr_matrix:
    """``L rho`` evaluated with operator products, without a superoperator."""
    if isinstance(rho, PhysicalOperator):
        rho = rho.tosparse()
    rho = sp.csr_matrix(rho)
    H = model.H.tosparse()
    out = -1j * (H @ rho - rho @ H)
    for A in model.jumps:
        A = A.tosparse()
        AdA = A.conj().T @ A
        out = out + model.eps * (2 * A @ rho @ A.conj().T - AdA @ rho - rho @ AdA)
    return sp.csr_matrix(out)


def liouvillian_residual(model: LindbladModel, rho) -> float:
    """``||L rho||_F / ||rho||_F``."""
    if isinstance(rho, PhysicalOperator):
        rho = rho.tosparse()
    rho = sp.csr_matrix(rho)
    nrm = spla.norm(rho)
    if nrm == 0:
        raise ValueError("residual undefined for the zero operator")
    return float(spla.norm(apply_liouvillian(model, rho)) / nrm)


def sector_indices(n: int, nu: int) -> np.ndarray:
    return np.flatnonzero(hole_counts(n) == nu)


def _restrict(model: LindbladModel, idx_r, idx_c=None):
    idx_c = idx_r if idx_c is None else idx_c
    H = model.H.tosparse()
    jumps = [A.tosparse() for A in model.jumps]
    return (H[idx_r][:, idx_r], H[idx_c][:, idx_c],
            [A[idx_r][:, idx_r] for A in jumps], [A[idx_c][:, idx_c] for A in jumps])


def sector_liouvillian(model: LindbladModel, nu: int, nu_col: int | None = None) -> sp.csr_matrix:
    """Liouvillian on ``Lin(H^(nu_col), H^(nu))`` (diagonal block when ``nu_col`` is None)."""
    ir = sector_indices(model.n, nu)
    ic = ir if nu_col is None else sector_indices(model.n, nu_col)
    return _block_liouvillian(*_restrict(model, ir, ic), model.eps)


def _null_vectors(M: sp.csr_matrix, tol: float) -> tuple:
    """(kernel dimension, smallest right singular vector, smallest singular values)."""
    if M.shape[0] <= DENSE_SVD_MAX:
        _, s, vh = np.linalg.svd(M.toarray())
        scale = max(s[0], 1.0)
        dim = int(np.sum(s <= tol * scale))
        return dim, vh[-1].conj(), s[-3:]
    # shifted inverse iteration on M^dag M via an LU of M
    lu = spla.splu(sp.csc_matrix(M) + 1e-13 * sp.identity(M.shape[0], format="csc"))
    rng = np.random.default_rng(12345)
    x = rng.standard_normal(M.shape[0]) + 1j * rng.standard_normal(M.shape[0])
    for _ in range(8):
        x = lu.solve(x)
        x /= np.linalg.norm(x)
    r = np.linalg.norm(M @ x)
    return (1 if r <= tol * max(spla.norm(M), 1.0) else 0), x, np.array([r])


def _require_positive_eps(eps: float) -> None:
    if eps == 0:
        raise DegeneracyError("eps = 0 leaves the unitary kernel infinitely degenerate")
    if eps < 0:
        raise ValueError("eps must be positive for a Lindblad generator")


def steady_states(model: LindbladModel, tol: float = 1e-9, jobs: int | None = None) -> list:
    """``[(nu, rho_nu)]`` with each ``rho_nu`` of unit trace.

    Raises :class:`DegeneracyError` when a sector kernel is not one-dimensional.
    """
    _require_positive_eps(model.eps)
    if model.n > ORACLE_MAX_N:
        raise SizeLimitError(f"oracle limited to n <= {ORACLE_MAX_N}")

    def solve(nu: int):
        idx = sector_indices(model.n, nu)
        d = len(idx)
        M = sector_liouvillian(model, nu)
        kdim, v, _ = _null_vectors(M, tol)
        if kdim != 1:
            raise DegeneracyError(f"sector {nu}: kernel dimension {kdim}")
        block = v.reshape(d, d)
        block = block / np.trace(block)
        full = sp.coo_matrix(block)
        rows, cols = idx[full.row], idx[full.col]
        op = sp.csr_matrix((full.data, (rows, cols)), shape=(3**model.n,) * 2)
        return nu, PhysicalOperator(model.n, op, False)

    nus = range(model.n + 1)
    if jobs and jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            return list(ex.map(solve, nus))
    return [solve(nu) for nu in nus]


def kernel_dimensions(model: LindbladModel, tol: float = 1e-9) -> dict:
    """Kernel dimension of every diagonal block; the total is expected to be ``n + 1``."""
    _require_positive_eps(model.eps)
    return {nu: _null_vectors(sector_liouvillian(model, nu), tol)[0] for nu in range(model.n + 1)}


def offdiagonal_kernel_dimensions(model: LindbladModel, tol: float = 1e-9) -> dict:
    """Measured kernel dimensions of the blocks ``Lin(H^(nu'), H^(nu))``, ``nu != nu'``.

    Reported only; nothing is asserted about them.
    """
    if model.n > 3:
        raise SizeLimitError("off-diagonal kernel report limited to n <= 3")
    out = {}
    for a in range(model.n + 1):
        for b in range(model.n + 1):
            if a != b:
                out[(a, b)] = _null_vectors(sector_liouvillian(model, a, b), tol)[0]
    return out


def build_currents(n: int) -> dict:
    """``{(i, j, x): J^{ij}_x}`` for bonds ``x = 1..n-1`` and ``{(i, x): J^i_x}`` totals."""
    n = check_chain_length(n, minimum=2)
    out = {}
    for x in range(1, n):
        for i in (1, 2, 3):
            total = None
            for j in (1, 2, 3):
                J = 1j * (np.kron(unit(i, j), unit(j, i)) - np.kron(unit(j, i), unit(i, j)))
                op = PhysicalOperator(n, sp.csr_matrix(local_operator(J, x, n), dtype=complex))
                out[(i, j, x)] = op
                total = op if total is None else total + op
            out[(i, x)] = total
    return out


def build_symmetry_maps(n: int) -> dict:
    """``N0`` and ``M`` as diagonal operators; ``R``, ``S``, ``T`` as operator maps."""
    n = check_chain_length(n)
    return {
        "N0": PhysicalOperator(n, sp.diags(hole_counts(n).astype(complex), format="csr")),
        "M": PhysicalOperator(n, sp.diags(magnetizations(n).astype(complex), format="csr")),
        "R": apply_reversal,
        "S": apply_flip,
        "T": apply_transpose,
    }


def _random_operator(d: int, rng, support=None, hermitian: bool = False) -> np.ndarray:
    X = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    if hermitian:
        X = X + X.conj().T
    if support is not None:
        mask = np.zeros((d, d), dtype=bool)
        mask[np.ix_(support, support)] = True
        X = np.where(mask, X, 0)
    return X


def check_oracle_invariants(n: int, eps: float = 1.0, tol: float = 1e-10, seed: int = 7) -> Report:
    """Trace and Hermiticity preservation, sector closure, strong and weak symmetries,
    continuity of currents, dissipator examples and the oracle NESS symmetries."""
    n = check_chain_length(n, minimum=2, maximum=4)
    rng = np.random.default_rng(seed)
    model = build_model(n, eps)
    L = build_liouvillian(model)
    d = 3**n
    report = Report(f"oracle-invariants n={n} eps={eps}")
    report.extend(check_hamiltonian_forms(n))

    rho = _random_operator(d, rng)
    r = abs(np.trace(L.apply(rho))) / np.linalg.norm(rho)
    report.add("trace preservation", r <= tol, r)

    herm = _random_operator(d, rng, hermitian=True)
    Lh = L.apply(herm)
    r = np.linalg.norm(Lh - Lh.conj().T) / np.linalg.norm(herm)
    report.add("hermiticity preservation", r <= tol, r)

    holes = hole_counts(n)
    worst = 0.0
    for nu in range(n + 1):
        idx = np.flatnonzero(holes == nu)
        X = L.apply(_random_operator(d, rng, support=idx))
        outside = X.copy()
        outside[np.ix_(idx, idx)] = 0
        worst = max(worst, np.linalg.norm(outside))
    report.add("sector closure", worst <= tol, worst)

    sym = build_symmetry_maps(n)
    N0, M = sym["N0"].tosparse(), sym["M"].tosparse()
    H = model.H.tosparse()
    r = spla.norm(H @ N0 - N0 @ H)
    for A in model.jumps:
        A = A.tosparse()
        r += spla.norm(A @ N0 - N0 @ A)
    report.add("strong symmetry N0", r <= tol, r)

    rho = _random_operator(d, rng)
    Md = M.toarray()
    r = np.linalg.norm(Md @ L.apply(rho) - L.apply(rho) @ Md - L.apply(Md @ rho - rho @ Md))
    report.add("weak symmetry M", r <= tol * np.linalg.norm(rho), r)

    cur = build_currents(n)
    r = 0.0
    for x in range(2, n):
        for i in (1, 2, 3):
            Q = local_operator(unit(i, i), x, n)
            lhs = 1j * (H @ Q - Q @ H)
            rhs = cur[(i, x - 1)].tosparse() - cur[(i, x)].tosparse()
            r = max(r, spla.norm(lhs - rhs))
    report.add("current continuity", r <= tol, r)
    r = max(spla.norm(sum(cur[(i, x)].tosparse() for i in (1, 2, 3))) for x in range(1, n))
    report.add("species currents sum to zero", r <= tol, r)

    A1 = model.jumps[0].tosparse()
    D1 = build_dissipator(A1)
    up = local_operator(unit(1, 1), 1, n).toarray()
    down = local_operator(unit(3, 3), 1, n).toarray()
    out = D1.apply(down)  # A1 = e^{13} takes |3> to |1>
    r = np.linalg.norm(out - 2 * up + 2 * down)
    report.add("dissipator moves down to up at site 1", r <= tol, r)
    dark = np.zeros((d, d))
    k = int(np.flatnonzero(holes == n)[0])
    dark[k, k] = 1.0
    r = np.linalg.norm(L.apply(dark))
    report.add("dark state stationary", r <= tol, r)
    r = abs(np.trace(D1.apply(_random_operator(d, rng)))) / d
    report.add("dissipator traceless", r <= tol, r)
    r = liouvillian_residual(model, sp.identity(d)) if n == 2 else 1.0
    report.add("identity not stationary", r > 0.1, r)

    states = steady_states(model)
    rho_total = sum(op.tosparse() for _, op in states)
    ness = PhysicalOperator(n, sp.csr_matrix(rho_total), False)
    rs = apply_reversal(apply_flip(ness))
    r = (rs - ness).norm() / ness.norm()
    report.add("oracle NESS RS invariant", r <= 1e-8, r)
    r = spla.norm(rho_total @ M - M @ rho_total) / spla.norm(rho_total)
    report.add("oracle NESS [rho,M]=0", r <= 1e-8, r)
    return report


# ---------------------------------------------------------------------------
# spin-1/2 XXX oracle


def no_hole_indices(n: int) -> np.ndarray:
    """Chain indices of states without holes, ordered like the spin-1/2 basis
    (label 1 -> 0, label 3 -> 1, site 1 most significant)."""
    return sector_indices(n, 0)


def xxx_steady_state(n: int, eps: float, tol: float = 1e-9) -> np.ndarray:
    """Unit-trace NESS of the boundary-driven spin-1/2 XXX chain on ``2^n`` states.

    Bulk ``h`` is the spin-1/2 swap, ``A1 = sigma^+`` (down to up) on site 1
    and ``A2 = sigma^-`` on site n, with the same rate ``eps``.
    """
    n = check_chain_length(n, minimum=2, maximum=6)
    _require_positive_eps(eps)
    P = _permutation_matrix(2)
    H = sum(local_operator_d(P, x, n, 2) for x in range(1, n))
    up = np.array([[0, 1], [0, 0]], dtype=float)
    A1 = local_operator_d(up, 1, n, 2)
    A2 = local_operator_d(up.T, n, n, 2)
    M = _block_liouvillian(H, H, [A1, A2], [A1, A2], eps)
    kdim, v, _ = _null_vectors(M, tol)
    if kdim != 1:
        raise DegeneracyError(f"XXX kernel dimension {kdim}")
    rho = v.reshape(2**n, 2**n)
    return rho / np.trace(rho)


def local_operator_d(X, x: int, n: int, d: int) -> sp.csr_matrix:
    X = sp.csr_matrix(X)
    ell = round(np.log(X.shape[0]) / np.log(d))
    return sp.kron(sp.kron(sp.identity(d ** (x - 1)), X), sp.identity(d ** (n - x - ell + 1)), format="csr")


def sector_dimension(n: int, nu: int) -> int:
    return comb(n, nu) * 2 ** (n - nu)
