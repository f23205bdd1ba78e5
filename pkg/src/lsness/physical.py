"""Operators on the ``3**n`` dimensional chain space and basis bookkeeping.

Basis states ``|i_1 ... i_n>`` with ``i in {1, 2, 3}`` are indexed by the
base-3 number with digits ``i_x - 1``, site 1 most significant.  Local state
2 is the hole.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import norm as sparse_norm

from .scalars import ZERO, ExactScalar

__all__ = [
    "PhysicalOperator",
    "digits",
    "index",
    "hole_counts",
    "magnetizations",
    "reversal_permutation",
    "flip_permutation",
    "apply_reversal",
    "apply_flip",
    "apply_transpose",
    "local_operator",
]


def digits(idx: int, n: int) -> tuple:
    """Local labels ``(i_1, ..., i_n)`` in ``{1, 2, 3}`` of basis index ``idx``."""
    out = []
    for _ in range(n):
        idx, r = divmod(idx, 3)
        out.append(r + 1)
    return tuple(reversed(out))


def index(labels) -> int:
    idx = 0
    for i in labels:
        idx = 3 * idx + (i - 1)
    return idx


@lru_cache(maxsize=None)
def _label_table(n: int) -> np.ndarray:
    dim = 3**n
    table = np.zeros((dim, n), dtype=np.int8)
    idx = np.arange(dim)
    for x in range(n - 1, -1, -1):
        table[:, x] = idx % 3 + 1
        idx //= 3
    table.setflags(write=False)
    return table


def hole_counts(n: int) -> np.ndarray:
    return (_label_table(n) == 2).sum(axis=1)


def magnetizations(n: int) -> np.ndarray:
    t = _label_table(n)
    return (t == 1).sum(axis=1) - (t == 3).sum(axis=1)


@lru_cache(maxsize=None)
def reversal_permutation(n: int) -> np.ndarray:
    t = _label_table(n)[:, ::-1] - 1
    return (t * (3 ** np.arange(n - 1, -1, -1))).sum(axis=1)


@lru_cache(maxsize=None)
def flip_permutation(n: int) -> np.ndarray:
    t = 3 - _label_table(n)  # label i -> 4 - i, digit i-1 -> 3-i
    return (t * (3 ** np.arange(n - 1, -1, -1))).sum(axis=1)


def local_operator(X, x: int, n: int):
    """Embed a dense operator on sites ``x .. x+ell-1`` (1-based) into the chain."""
    X = sp.csr_matrix(X)
    ell = round(np.log(X.shape[0]) / np.log(3))
    left = sp.identity(3 ** (x - 1), format="csr")
    right = sp.identity(3 ** (n - x - ell + 1), format="csr")
    return sp.kron(sp.kron(left, X), right, format="csr")


@dataclass(frozen=True)
class PhysicalOperator:
    """Operator on the chain space.

    Exact operators keep a sparse ``{(row, col): ExactScalar}`` dict; numeric
    ones a dense array or a scipy sparse matrix.
    """

    n: int
    data: object
    exact: bool = False

    @property
    def dim(self) -> int:
        return 3**self.n

    @property
    def shape(self) -> tuple:
        return (self.dim, self.dim)

    # -- conversions --------------------------------------------------
    def evaluate(self, eps: float, mu: float = 0.0) -> "PhysicalOperator":
        if not self.exact:
            return self
        rows, cols, vals = [], [], []
        for (r, c), v in self.data.items():
            rows.append(r)
            cols.append(c)
            vals.append(v.evaluate(eps, mu))
        m = sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=self.shape)
        return PhysicalOperator(self.n, m, False)

    def tosparse(self, eps: float | None = None, mu: float = 0.0) -> sp.csr_matrix:
        if self.exact:
            return self.evaluate(eps, mu).data
        return sp.csr_matrix(self.data)

    def toarray(self, eps: float | None = None, mu: float = 0.0) -> np.ndarray:
        if self.exact:
            return self.evaluate(eps, mu).data.toarray()
        return self.data.toarray() if sp.issparse(self.data) else np.asarray(self.data)

    def entries(self) -> dict:
        """Nonzero entries as a ``{(row, col): value}`` dict."""
        if self.exact:
            return dict(self.data)
        m = sp.coo_matrix(self.data)
        return {(int(r), int(c)): complex(v) for r, c, v in zip(m.row, m.col, m.data) if v != 0}

    # -- algebra ------------------------------------------------------
    def dagger(self) -> "PhysicalOperator":
        if self.exact:
            return PhysicalOperator(self.n, {(c, r): v.conj() for (r, c), v in self.data.items()}, True)
        return PhysicalOperator(self.n, self.data.conj().T, False)

    def __matmul__(self, other: "PhysicalOperator") -> "PhysicalOperator":
        if self.n != other.n:
            raise ValueError("chain lengths differ")
        if self.exact and other.exact:
            return PhysicalOperator(self.n, _dict_matmul(self.data, other.data), True)
        if self.exact or other.exact:
            raise TypeError("cannot mix exact and numeric operators; evaluate first")
        return PhysicalOperator(self.n, self.data @ other.data, False)

    def __add__(self, other: "PhysicalOperator") -> "PhysicalOperator":
        if self.exact and other.exact:
            out = dict(self.data)
            for k, v in other.data.items():
                s = out.get(k, ZERO) + v
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
            return PhysicalOperator(self.n, out, True)
        return PhysicalOperator(self.n, self.data + other.data, False)

    def __neg__(self):
        if self.exact:
            return PhysicalOperator(self.n, {k: -v for k, v in self.data.items()}, True)
        return PhysicalOperator(self.n, -self.data, False)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PhysicalOperator":
        if self.exact:
            c = ExactScalar.coerce(c)
            return PhysicalOperator(self.n, {k: c * v for k, v in self.data.items() if c * v}, True)
        return PhysicalOperator(self.n, c * self.data, False)

    def commutator(self, other: "PhysicalOperator") -> "PhysicalOperator":
        return self @ other - other @ self

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.exact:
            return not self.data
        return self.norm() <= tol

    def norm(self) -> float:
        if self.exact:
            raise TypeError("norm of an exact operator needs an evaluation point")
        if sp.issparse(self.data):
            return float(sparse_norm(self.data))
        return float(np.linalg.norm(self.data))

    def nnz(self) -> int:
        if self.exact:
            return len(self.data)
        return int(sp.csr_matrix(self.data).count_nonzero())

    def max_eps_degree(self) -> int:
        return max((v.degree_eps() for v in self.data.values()), default=-1)

    def __eq__(self, other):
        if not isinstance(other, PhysicalOperator) or self.n != other.n or self.exact != other.exact:
            return NotImplemented
        if self.exact:
            return self.data == other.data
        return (self.tosparse() != other.tosparse()).nnz == 0

    # -- dump ---------------------------------------------------------
    def to_json(self, header: dict | None = None) -> str:
        head = {"n": self.n, "mode": "exact" if self.exact else "numeric", "normalized": False}
        head.update(header or {})
        if self.exact:
            entries = [[r, c, v.to_json()] for (r, c), v in sorted(self.data.items())]
        else:
            entries = [[r, c, v.real, v.imag] for (r, c), v in sorted(self.entries().items())]
        return json.dumps({"header": head, "entries": entries}, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "PhysicalOperator":
        obj = json.loads(text)
        n = obj["header"]["n"]
        if obj["header"]["mode"] == "exact":
            return cls(n, {(r, c): ExactScalar.from_json(v) for r, c, v in obj["entries"]}, True)
        rows = [e[0] for e in obj["entries"]]
        cols = [e[1] for e in obj["entries"]]
        vals = [complex(e[2], e[3]) for e in obj["entries"]]
        return cls(n, sp.csr_matrix((vals, (rows, cols)), shape=(3**n, 3**n)), False)


def _dict_matmul(a: dict, b: dict) -> dict:
    by_row: dict = {}
    for (k, c), v in b.items():
        by_row.setdefault(k, []).append((c, v))
    out: dict = {}
    for (r, k), u in a.items():
        for c, v in by_row.get(k, ()):
            key = (r, c)
            if key in out:
                out[key] = out[key] + u * v
            else:
                out[key] = u * v
    return {k: v for k, v in out.items() if v}


def _permute(op: PhysicalOperator, perm: np.ndarray, transpose: bool = False) -> PhysicalOperator:
    if op.exact:
        data = {}
        for (r, c), v in op.data.items():
            rr, cc = int(perm[r]), int(perm[c])
            data[(cc, rr) if transpose else (rr, cc)] = v
        return PhysicalOperator(op.n, data, True)
    m = sp.coo_matrix(op.data)
    rows, cols = perm[m.row], perm[m.col]
    if transpose:
        rows, cols = cols, rows
    return PhysicalOperator(op.n, sp.csr_matrix((m.data, (rows, cols)), shape=op.shape), False)


def apply_reversal(op: PhysicalOperator) -> PhysicalOperator:
    """Lattice reversal: ``e^{i1 j1} (x) ... (x) e^{in jn} -> e^{in jn} (x) ... (x) e^{i1 j1}``."""
    return _permute(op, reversal_permutation(op.n))


def apply_flip(op: PhysicalOperator) -> PhysicalOperator:
    """Local up/down mirror on every site: ``e^{ij} -> e^{4-i, 4-j}``."""
    return _permute(op, flip_permutation(op.n))


def apply_transpose(op: PhysicalOperator) -> PhysicalOperator:
    """Site-wise transposition ``e^{ij} -> e^{ji}``, i.e. the full matrix transpose."""
    return _permute(op, np.arange(op.dim), transpose=True)
