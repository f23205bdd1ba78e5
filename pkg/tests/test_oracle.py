import numpy as np
import pytest
import scipy.sparse as sp

from lsness.exceptions import DegeneracyError, SizeLimitError
from lsness.mpo import build_density, default_params, grand_canonical_density, project_sector
from lsness.oracle import (
    build_currents,
    build_dissipator,
    build_hamiltonian,
    build_liouvillian,
    build_model,
    check_hamiltonian_forms,
    check_oracle_invariants,
    kernel_dimensions,
    liouvillian_residual,
    no_hole_indices,
    offdiagonal_kernel_dimensions,
    sandwich,
    sector_dimension,
    sector_indices,
    steady_states,
    unit,
    xxx_steady_state,
)
from lsness.physical import local_operator


def overlap(a, b):
    a, b = np.ravel(a), np.ravel(b)
    return abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))


def test_row_major_sandwich():
    rng = np.random.default_rng(0)
    X, Y, R = (rng.standard_normal((3, 3)) for _ in range(3))
    got = sandwich(X, Y) @ R.ravel()
    assert np.allclose(got, (X @ R @ Y).ravel())


def test_hamiltonian_is_permutation():
    assert check_hamiltonian_forms(2).passed
    assert check_hamiltonian_forms(3).passed
    H = build_hamiltonian(2).toarray()
    v = np.zeros(9)
    v[1] = 1  # |1,2>
    w = np.zeros(9)
    w[3] = 1  # |2,1>
    assert np.allclose(H @ v, w)


def test_dissipator_on_down_state():
    A = unit(1, 3)
    D = build_dissipator(A)
    down = unit(3, 3)
    assert np.allclose(D.apply(down), 2 * unit(1, 1) - 2 * down)
    assert np.allclose(D.apply(unit(1, 1)), 0)


def test_identity_is_not_stationary():
    assert liouvillian_residual(build_model(2, 1.0), sp.identity(9)) > 0.1


def test_liouvillian_residual_refuses_zero():
    with pytest.raises(ValueError):
        liouvillian_residual(build_model(2, 1.0), sp.csr_matrix((9, 9)))


@pytest.mark.parametrize("n", [2, 3])
def test_kernel_dimension_counts_sectors(n):
    kd = kernel_dimensions(build_model(n, 0.7))
    assert kd == {nu: 1 for nu in range(n + 1)}


def test_offdiagonal_kernels_are_reported():
    kd = offdiagonal_kernel_dimensions(build_model(2, 0.7))
    assert set(kd) == {(a, b) for a in range(3) for b in range(3) if a != b}
    assert all(isinstance(v, int) for v in kd.values())
    with pytest.raises(SizeLimitError):
        offdiagonal_kernel_dimensions(build_model(4, 0.7))


def test_zero_coupling_is_degenerate():
    with pytest.raises(DegeneracyError):
        steady_states(build_model(2, 0.0))
    with pytest.raises(ValueError):
        steady_states(build_model(2, -1.0))


@pytest.mark.parametrize("n,eps", [(2, 0.2), (3, 1.0), (3, 5.0)])
def test_mpo_matches_oracle_per_sector(n, eps):
    model = build_model(n, eps)
    base = build_density(n, default_params(n, eps))
    for nu, rho in steady_states(model):
        assert np.trace(rho.toarray()) == pytest.approx(1.0)
        assert overlap(project_sector(base, nu).toarray(), rho.toarray()) >= 1 - 1e-8


def test_grand_canonical_state_is_stationary():
    model = build_model(3, 0.8)
    rho = grand_canonical_density(3, 0.8, -1.5)
    assert liouvillian_residual(model, rho) <= 1e-10


def test_dark_state():
    n = 3
    states = dict(steady_states(build_model(n, 1.0)))
    top = states[n].toarray()
    k = sector_indices(n, n)[0]
    want = np.zeros_like(top)
    want[k, k] = 1
    assert np.allclose(top, want)


def test_jobs_do_not_change_results():
    model = build_model(3, 0.9)
    a = steady_states(model)
    b = steady_states(model, jobs=3)
    for (na, ra), (nb, rb) in zip(a, b):
        assert na == nb
        assert (ra - rb).norm() == 0


@pytest.mark.parametrize("n", [2, 3])
def test_oracle_invariants(n):
    rep = check_oracle_invariants(n, 0.9)
    assert rep.passed, str(rep)


def test_pairwise_continuity_does_not_hold():
    # the per-pair current tensors do not close a continuity equation by themselves
    n = 3
    H = build_hamiltonian(n).tosparse()
    cur = build_currents(n)
    Q = local_operator(unit(1, 1) - unit(2, 2), 2, n)
    lhs = 1j * (H @ Q - Q @ H)
    rhs = cur[(1, 2, 1)].tosparse() - cur[(1, 2, 2)].tosparse()
    assert abs(lhs - rhs).max() > 0.1


def test_sector_dimensions():
    for n in (2, 3, 4):
        for nu in range(n + 1):
            assert len(sector_indices(n, nu)) == sector_dimension(n, nu)


def test_xxx_limit():
    n = 4
    rho = grand_canonical_density(n, 1.0, -40.0).toarray()
    idx = no_hole_indices(n)
    block = rho[np.ix_(idx, idx)]
    assert overlap(block, xxx_steady_state(n, 1.0)) >= 1 - 1e-8


def test_xxx_oracle_is_stationary_and_polarized():
    rho = xxx_steady_state(3, 0.5)
    assert np.trace(rho) == pytest.approx(1.0)
    assert np.allclose(rho, rho.conj().T)
    sz = np.diag([1.0, -1.0])
    first = np.kron(sz, np.identity(4))
    last = np.kron(np.identity(4), sz)
    assert np.trace(rho @ first).real > 0 > np.trace(rho @ last).real


def test_liouvillian_sizes():
    L = build_liouvillian(build_model(2, 1.0))
    assert L.dim == 9
    assert L.matrix.shape == (81, 81)
