from fractions import Fraction

import numpy as np
import pytest

from lsness.auxrep import ReprParams, build_conjugate, build_generators
from lsness.exceptions import ConsistencyError, CutoffError, SymmetryError
from lsness.mpo import (
    build_density,
    check_boundary_system,
    check_defining_relation,
    check_parities,
    check_sutherland,
    check_transfer_commutation,
    contract_cholesky,
    default_params,
    grand_canonical_density,
    project_sector,
    wgs_contract,
)
from lsness.physical import PhysicalOperator, hole_counts, index
from lsness.scalars import ONE, ExactScalar


def cholesky_table(n):
    return contract_cholesky(n).data


def test_single_site_is_identity():
    S = cholesky_table(1)
    assert S == {(k, k): ONE for k in range(3)}


def test_two_site_amplitudes():
    eta = ExactScalar.eta()
    want = {(k, k): ONE for k in range(9)}
    want[(index((1, 2)), index((2, 1)))] = eta
    want[(index((2, 3)), index((3, 2)))] = eta
    want[(index((1, 3)), index((3, 1)))] = 2 * eta
    assert cholesky_table(2) == want


def test_two_site_partition_function():
    rho = build_density(2, check=True)
    trace = sum((v for (r, c), v in rho.data.items() if r == c), ExactScalar())
    assert trace == 9 + 6 * ExactScalar.eps(2)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_degree_bound_and_gaussian_integers(n):
    for v in cholesky_table(n).values():
        assert v.degree_eps() <= n
        assert v.degree_z() == 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cutoff_does_not_change_the_factor(n):
    a = contract_cholesky(n, ReprParams(cutoff=n))
    b = contract_cholesky(n, ReprParams(cutoff=n + 1))
    c = contract_cholesky(n, ReprParams(cutoff=max(n // 2, 1)))
    assert a == b == c


def test_cutoff_below_walk_radius_is_refused():
    with pytest.raises(CutoffError):
        contract_cholesky(6, ReprParams(cutoff=2))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_density_routes_agree_exactly(n):
    build_density(n, check=True)


def test_density_routes_agree_numerically():
    rho = build_density(4, default_params(4, 0.7), check=True)
    dense = rho.toarray()
    assert np.allclose(dense, dense.conj().T)
    w = np.linalg.eigvalsh(dense)
    assert w.min() >= -1e-12 * w.max()


def test_dark_state_sector():
    rho = build_density(3, default_params(3, 0.7))
    top = project_sector(rho, 3).entries()
    k = index((2, 2, 2))
    assert list(top) == [(k, k)]


def test_projection_examples():
    S2 = contract_cholesky(2)
    k = index((2, 2))
    assert project_sector(S2, 2).data == {(k, k): ONE}
    rho = build_density(3, default_params(3, 0.7))
    parts = [project_sector(rho, nu) for nu in range(4)]
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    assert (total - rho).norm() < 1e-12
    assert (parts[0] @ parts[1]).norm() == 0


def test_projection_rejects_sector_mixing():
    n = 2
    bad = PhysicalOperator(n, {(index((1, 1)), index((2, 1))): ONE}, True)
    with pytest.raises(SymmetryError):
        project_sector(bad, 0)


def test_grand_canonical_routes_and_weights():
    n = 3
    rho = grand_canonical_density(n, 0.8, 1.3)
    base = grand_canonical_density(n, 0.8, 0.0)
    holes = hole_counts(n)
    d, d0 = rho.tosparse().diagonal(), base.tosparse().diagonal()
    for nu in range(n + 1):
        ratio = d[holes == nu].sum() / d0[holes == nu].sum()
        assert ratio == pytest.approx(np.exp(1.3 * nu))
    grand_canonical_density(n, 0.8, -0.6, method="two_leg")
    grand_canonical_density(n, None)
    assert (base - build_density(n, default_params(n, 0.8))).norm() < 1e-12


def test_grand_canonical_mismatch_is_reported(monkeypatch):
    import lsness.mpo as mpo

    real = mpo.build_density

    def skewed(*a, **k):
        out = real(*a, **k)
        return out.scale(2.0) if not out.exact else out

    monkeypatch.setattr(mpo, "build_density", skewed)
    with pytest.raises(ConsistencyError):
        mpo.grand_canonical_density(2, 0.5, 0.3)


def test_sutherland_exact_and_numeric():
    assert check_sutherland(ReprParams(cutoff=4)).passed
    assert check_sutherland(ReprParams(cutoff=4, epsilon=1.3)).passed


def test_sutherland_at_zero_coupling_reduces_to_commutator():
    rep = check_sutherland(ReprParams(cutoff=4, epsilon=0.0))
    assert rep.passed
    assert "0" in rep["LOD"].detail


@pytest.mark.parametrize("n", [2, 3, 4])
def test_defining_relation(n):
    assert check_defining_relation(n).passed
    for nu in range(n + 1):
        assert check_defining_relation(n, sector=nu).passed


def test_defining_relation_at_zero_coupling():
    assert check_defining_relation(3, ReprParams(cutoff=3, epsilon=0.0)).passed


def test_boundary_system_and_negative_control():
    assert check_boundary_system(ReprParams(cutoff=3)).passed
    assert check_boundary_system(ReprParams(cutoff=3, epsilon=1.0)).passed
    bad = build_generators(ReprParams(cutoff=3, spin_branch=-1))
    good = build_generators(ReprParams(cutoff=3))
    rep = check_boundary_system(lax=bad, lbar=build_conjugate(good))
    assert not rep["left"].passed and not rep["right"].passed


@pytest.mark.parametrize("n", [2, 3, 4])
def test_transfer_commutation_exact(n):
    assert check_transfer_commutation(n, Fraction(1, 2), Fraction(2)).passed
    assert check_transfer_commutation(n, Fraction(1, 3), Fraction(1, 3)).passed


def test_transfer_commutation_grand_canonical():
    rep = check_transfer_commutation(4, 0.5, 2.0, mu=-0.7, mu2=1.1, mode="numeric")
    assert rep.passed, str(rep)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_walking_graph_states_match_lax_contraction(n):
    assert wgs_contract(n).data == contract_cholesky(n).data


def test_walking_graph_degenerate_walks_add_coherently():
    S = wgs_contract(2).data
    assert S[(index((1, 3)), index((3, 1)))] == 2 * ExactScalar.eta()


def test_walking_graph_numeric():
    a = wgs_contract(4, eps=0.6).tosparse()
    b = contract_cholesky(4, default_params(4, 0.6)).tosparse()
    assert abs(a - b).max() < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_parities(n):
    assert check_parities(n).passed
    assert check_parities(n, eps=0.9).passed


def test_dump_round_trip():
    S = contract_cholesky(3)
    again = PhysicalOperator.from_json(S.to_json({"epsilon": None}))
    assert again == S
    num = contract_cholesky(3, default_params(3, 0.4))
    assert PhysicalOperator.from_json(num.to_json()) == num
