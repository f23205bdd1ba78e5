import math

import numpy as np
import pytest

from lsness.auxrep import ReprParams
from lsness.exceptions import SizeLimitError
from lsness.mpo import build_density, default_params, sector_traces
from lsness.observables import (
    check_aux_symmetries,
    current_expectation,
    current_matrix,
    current_profile,
    density_profile,
    doping,
    local_expectation,
    local_expectation_physical,
    partition_function,
    partition_function_exact,
    record,
    scaling_fit,
    sector_partition_functions,
    transfer_space,
)
from lsness.scalars import ExactScalar, poly_eval


def test_two_site_partition_function():
    z = partition_function_exact(2)
    assert poly_eval(z, 1.0, 0.0) == pytest.approx(15.0)
    assert partition_function(2, 1.0) == pytest.approx(15.0)
    want = 4 + 4 * ExactScalar.z(2) + ExactScalar.z(4) + 4 * ExactScalar.eps(2) \
        + 2 * ExactScalar.eps(2) * ExactScalar.z(2)
    assert z == want


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_partition_function_routes_agree(n):
    for eps, mu in [(0.5, 0.0), (1.3, -0.8), (2.0, 1.1)]:
        exact = poly_eval(partition_function_exact(n), eps, mu).real
        assert partition_function(n, eps, mu) == pytest.approx(exact, rel=1e-12)
        assert partition_function(n, eps, mu, reduced=False) == pytest.approx(exact, rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_partition_function_matches_density_trace(n):
    rho = build_density(n, default_params(n, 0.9))
    tr = float(rho.tosparse().diagonal().sum().real)
    assert partition_function(n, 0.9) == pytest.approx(tr, rel=1e-12)


def test_reduced_space_is_smaller():
    full = transfer_space(6, 1.0, 0.0, reduced=False)
    small = transfer_space(6, 1.0, 0.0, reduced=True)
    assert small.dim < full.dim


def test_cutoff_choice_does_not_matter():
    n = 6
    a = partition_function(n, 0.7, 0.3)
    b = partition_function(n, 0.7, 0.3, cutoff=n)
    assert a == pytest.approx(b, rel=1e-12)


def test_sector_traces_agree_with_density():
    n = 4
    rho = build_density(n, default_params(n, 0.6))
    zs = sector_partition_functions(n, 0.6)
    want = np.array([complex(t).real for t in sector_traces(rho)])
    assert np.allclose(zs, want, rtol=1e-12)
    assert zs[n] == pytest.approx(1.0)


@pytest.mark.parametrize("n", [2, 3, 5, 7])
def test_current_recurrence(n):
    for eps, mu in [(0.5, -1.0), (2.0, 1.0)]:
        z = partition_function(n, eps, mu)
        zm = partition_function(n - 1, eps, mu)
        j1 = current_profile(1, n, eps, mu)
        j3 = current_profile(3, n, eps, mu)
        want = 2 * eps * zm / z
        assert np.allclose(j1, want, rtol=1e-10, atol=0)
        assert np.allclose(j3, -j1, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("n", [4, 5])
def test_partial_currents_are_bond_independent_on_short_chains(n):
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            prof = current_profile(i, n, 0.8, 0.4, j=j)
            assert np.ptp(prof) <= 1e-10


def test_partial_currents_vary_in_the_middle_of_six_sites():
    # only species totals obey a continuity equation; at n = 6 the pair
    # currents shift on the central bond while the totals stay flat
    n = 6
    prof = current_profile(1, n, 0.8, 0.4, j=2)
    assert np.ptp(prof) > 1e-6
    phys = [local_expectation_physical(current_matrix(1, 2), x, n, 0.8, 0.4).real for x in range(1, n)]
    assert np.allclose(prof, phys, rtol=1e-10)
    for i in (1, 2, 3):
        assert np.ptp(current_profile(i, n, 0.8, 0.4)) <= 1e-12


def test_species_currents_sum_to_zero():
    tot = sum(current_profile(i, 4, 1.1, -0.3) for i in (1, 2, 3))
    assert np.allclose(tot, 0, atol=1e-12)


def test_current_matrix_is_hermitian():
    J = current_matrix(1, 3)
    assert np.allclose(J, J.conj().T)
    assert np.allclose(current_matrix(2, 2), 0)


def test_doubled_space_matches_physical_space():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    for x in (1, 2, 3):
        a = local_expectation(X, x, 4, 0.7, 0.5)
        b = local_expectation_physical(X, x, 4, 0.7, 0.5)
        assert a == pytest.approx(b, rel=1e-10, abs=1e-12)
    Y = rng.standard_normal((3, 3))
    assert local_expectation(Y, 4, 4, 1.2) == pytest.approx(local_expectation_physical(Y, 4, 4, 1.2))


def test_support_checks():
    with pytest.raises(ValueError):
        local_expectation(np.identity(9), 4, 4, 1.0)
    with pytest.raises(ValueError):
        local_expectation(np.identity(4), 1, 4, 1.0)
    with pytest.raises(SizeLimitError):
        local_expectation_physical(np.identity(3), 1, 9, 1.0)


def test_densities_sum_to_one():
    tot = sum(density_profile(s, 5, 0.9, 0.2) for s in (1, 2, 3))
    assert np.allclose(tot, 1.0)


def test_doping_limits_and_routes():
    lo = doping(4, 1.0, -40.0)
    hi = doping(4, 1.0, 40.0)
    assert lo["sector"] < 1e-12 and hi["sector"] > 1 - 1e-12
    mid = doping(5, 0.8, 0.3)
    assert mid["agree"]
    r2 = doping(2, 1.0, 0.0)["sector"]
    assert r2 == pytest.approx((6 + 2 * 1) / (2 * 15))  # Z_2 sectors 8, 6, 1


def test_doping_is_monotone():
    rs = [doping(4, 1.0, mu)["sector"] for mu in np.linspace(-4, 4, 9)]
    assert all(0 <= r <= 1 for r in rs)
    assert all(b > a for a, b in zip(rs, rs[1:]))


def test_aux_symmetries():
    rep = check_aux_symmetries()
    assert rep.passed, str(rep)
    assert check_aux_symmetries(ReprParams(cutoff=4, epsilon=0.6)).passed


def test_literal_reachability_constraint_fails():
    rep = check_aux_symmetries(literal_constraint=True)
    assert not rep["reachable j+k-2l = jb+kb-2lb"].passed
    assert rep["reachable j+k+2l = jb+kb+2lb"].passed


def test_scaling_fit_shape():
    res = scaling_fit(1.0, 0.0, range(3, 9), with_currents=True)
    assert len(res.log_z) == 6 and len(res.current_ratio) == 6
    assert np.allclose(res.current_ratio, 2.0)
    assert max(abs(r) for r in res.residuals) < 0.1
    assert res.to_dict()["n"] == list(range(3, 9))
    with pytest.raises(ValueError):
        scaling_fit(1.0, 0.0, [3, 4, 5])


def test_record_schema():
    row = record(3, 1.0, 0.0, "current", 0.25 + 0j, sites=[1, 2])
    assert row["value_re"] == 0.25 and row["value_im"] == 0.0
    assert math.isfinite(row["epsilon"])


def test_current_expectation_is_real_valued():
    assert isinstance(current_expectation(1, 3, 1, 3, 1.0), float)
