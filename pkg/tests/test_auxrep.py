import numpy as np
import pytest

from lsness.auxrep import (
    VAC,
    AuxOperator,
    AuxState,
    ReprParams,
    VertexComponents,
    apply_chemical_weight,
    build_conjugate,
    build_generators,
    check_levi_structure,
    check_lie_algebra,
    check_vacuum_conditions,
    check_weyl_heisenberg,
)
from lsness.exceptions import CutoffError, UnsupportedCombinationError
from lsness.scalars import ONE, ExactScalar


@pytest.fixture(scope="module")
def exact5():
    return build_generators(ReprParams(cutoff=5))


def test_vacuum_columns(exact5):
    eta = ExactScalar.eta()
    assert exact5["t-"].apply({VAC: ONE}) == {AuxState(1, 0, 0): eta}
    assert exact5["v-"].apply({VAC: ONE}) == {AuxState(1, 1, 0): eta, AuxState(0, 0, 1): 2 - eta}
    for name in ("t+", "u+", "v+"):
        assert exact5[name].apply({VAC: ONE}) == {}


def test_vacuum_rows(exact5):
    eta = ExactScalar.eta()
    assert exact5["u+"].apply_bra({VAC: ONE}) == {AuxState(0, 1, 0): eta}
    assert exact5["v+"].apply_bra({VAC: ONE}) == {AuxState(1, 1, 0): eta, AuxState(0, 0, 1): eta}
    assert exact5["t-"].apply_bra({VAC: ONE}) == {}
    assert exact5["l_up"].apply({VAC: ONE}) == {VAC: ONE}


def test_l0_is_identity_and_stencil_is_small(exact5):
    l0 = exact5["l0"]
    assert all(t == s and v == ONE for (t, s), v in l0.entries.items())
    assert len(l0.entries) == 6**3
    assert max(op.max_targets_per_source() for _, op in exact5.items()) <= 4


def test_lie_algebra_exact(exact5):
    rep = check_lie_algebra(exact5)
    assert rep.passed, str(rep)
    assert rep["[t+,t-]"].residual == 0
    assert rep["[v+,v-]"].passed
    assert rep["[l_up,l_dn]"].passed


def test_lie_algebra_conjugate_and_numeric(exact5):
    assert check_lie_algebra(build_conjugate(exact5)).passed
    num = build_generators(ReprParams(cutoff=5, epsilon=0.7, basis="orthonormal"))
    assert check_lie_algebra(num).passed


def test_lie_algebra_detects_a_wrong_generator(exact5):
    comps = dict(exact5.comps)
    comps[(1, 2)] = comps[(1, 2)].scale(ExactScalar.const(2))
    broken = type(exact5)(comps, exact5.params, exact5.eta)
    assert not check_lie_algebra(broken).passed


def test_vacuum_conditions(exact5):
    assert check_vacuum_conditions(exact5).passed
    assert check_vacuum_conditions(build_conjugate(exact5)).passed
    assert check_vacuum_conditions(apply_chemical_weight(exact5)).passed


def test_wrong_verma_weight_breaks_vacuum_conditions():
    bad = build_generators(ReprParams(cutoff=3, spin_branch=-1))
    assert not check_vacuum_conditions(bad).passed


def test_weyl_heisenberg_and_levi(exact5):
    assert check_weyl_heisenberg(ReprParams(cutoff=5)).passed
    assert check_levi_structure(exact5).passed


def test_exact_orthonormal_is_refused():
    with pytest.raises(UnsupportedCombinationError):
        build_generators(ReprParams(cutoff=3, basis="orthonormal"))
    with pytest.raises(CutoffError):
        ReprParams(cutoff=0)


def test_conjugation_routes_agree(exact5):
    a = build_conjugate(exact5)
    b = build_conjugate(exact5, method="reflect")
    assert a == b
    eta = ExactScalar.eta()
    assert a["t-"].apply({VAC: ONE}) == {AuxState(1, 0, 0): -eta}
    assert a["l0"] == exact5["l0"]
    back = {pos: op.conj() for pos, op in a.items()}
    assert all(back[pos] == exact5[pos] for pos in back)
    num = build_generators(ReprParams(cutoff=3, epsilon=0.4))
    assert build_conjugate(num) == build_conjugate(num, method="reflect")
    with pytest.raises(ValueError):
        build_conjugate(a)


def test_chemical_weight_touches_row_two_only(exact5):
    w = apply_chemical_weight(exact5)
    z = ExactScalar.z()
    for (i, j), op in exact5.items():
        want = op.scale(z) if i == 2 else op
        assert w[(i, j)] == want
    num = build_generators(ReprParams(cutoff=3, epsilon=0.4))
    assert apply_chemical_weight(num, 0.0) == num
    with pytest.raises(ValueError):
        apply_chemical_weight(w)


def test_two_leg_vacuum_entries(exact5):
    vertex = VertexComponents(exact5, build_conjugate(exact5))
    vv = {(VAC, VAC): ONE}
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            got = vertex.apply_ket(i, j, vv).get((VAC, VAC))
            assert (got == ONE) if i == j else (got is None)
    eta = ExactScalar.eta()
    e100 = AuxState(1, 0, 0)
    assert vertex.apply_ket(2, 2, vv)[(e100, e100)] == eta * (-eta)


def test_two_leg_weight_exponents(exact5):
    w = apply_chemical_weight(exact5)
    vertex = VertexComponents(w, build_conjugate(w))
    vv = {(VAC, VAC): ONE}
    assert vertex.apply_ket(2, 2, vv)[(VAC, VAC)] == ExactScalar.z(2)
    assert vertex.apply_ket(1, 1, vv)[(VAC, VAC)] == ONE


def test_cutoff_mismatch_is_refused(exact5):
    other = build_generators(ReprParams(cutoff=3))
    with pytest.raises(CutoffError):
        VertexComponents(exact5, build_conjugate(other))


def test_dumps_round_trip(exact5):
    op = exact5["v-"]
    assert AuxOperator.from_json(op.to_json()) == op
    first = op.dump_text().splitlines()[0].split(maxsplit=6)
    assert len(first) == 7 and all(t.isdigit() for t in first[:6])
    assert ExactScalar.parse(first[6]) == op.entry(tuple(map(int, first[:3])), tuple(map(int, first[3:6])))


def _vacuum_expectation(lax, word):
    vec = {VAC: lax.one()}
    for pos in reversed(word):
        vec = lax[pos].apply(vec)
    return complex(vec.get(VAC, 0))


def test_monomial_and_orthonormal_bases_agree_on_vacuum_expectations():
    rng = np.random.default_rng(3)
    mono = build_generators(ReprParams(cutoff=6, epsilon=0.9))
    orth = build_generators(ReprParams(cutoff=6, epsilon=0.9, basis="orthonormal"))
    positions = [(i, j) for i in (1, 2, 3) for j in (1, 2, 3)]
    for _ in range(200):
        length = int(rng.integers(1, 7))
        word = [positions[k] for k in rng.integers(0, 9, size=length)]
        assert _vacuum_expectation(mono, word) == pytest.approx(_vacuum_expectation(orth, word), abs=1e-12)
