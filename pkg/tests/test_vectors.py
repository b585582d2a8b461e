import random
from fractions import Fraction

import pytest

from itmlab import Sign, interval, make_map, minus, plus
from itmlab.attractor import attractor, exact_period, maximal_periodic_interval
from itmlab.itm import perturbed
from itmlab.returnmap import return_map
from itmlab.vectors import (
    CoeffVector,
    DimensionMismatch,
    FamilyAssemblyError,
    Infeasible,
    NotInConnectionClass,
    VectorFamily,
    assemble_family,
    connection_vectors,
    cyclic_chain_vectors,
    general_connection_vector,
    landing_vector,
    param_vector,
    product,
    rank,
    return_vector,
    solve_min_norm,
)
from conftest import random_itm


@pytest.fixture
def bt_fixture():
    return make_map(["0", "1/2", "3/4", "1"], ["1/2", "1/4", "-3/4"])


def _setup(m, J):
    X = attractor(m, 1000).X
    return X, return_map(m, X, interval(*J))


def test_product_zero_vector(fig_map):
    v = CoeffVector((0, 0, 0), (0, 0))
    assert product(v, param_vector(fig_map)) == 0


def test_product_dimension_mismatch():
    v = CoeffVector((1, 0), (0,))
    with pytest.raises(DimensionMismatch):
        product(v, [Fraction(1)])


def test_general_connection_fig(fig_map):
    v = general_connection_vector(fig_map, minus("1/3"))
    assert v.e_part == (1, 0, 0)
    assert v.f_part == (1, -1)
    assert product(v, param_vector(fig_map)) == 0
    with pytest.raises(NotInConnectionClass):
        general_connection_vector(fig_map, plus("1/3"))


def test_landing_vector_fig_left_component(fig_map):
    X, rmd = _setup(fig_map, ("1/6", "13/42"))
    v = landing_vector(fig_map, rmd, 0)
    assert v.e_part == (1, 1, 0)
    assert v.f_part == (0, -1)
    assert product(v, param_vector(fig_map)) == -rmd.landings[0].a


def test_landing_vector_fig_right_component(fig_map):
    X, rmd = _setup(fig_map, ("1/2", "17/21"))
    v = landing_vector(fig_map, rmd, 0)
    assert v.e_part == (0, 0, 0)
    assert v.f_part == (0, -1)
    assert product(v, param_vector(fig_map)) == -Fraction(2, 3)


def test_return_vectors_fig(fig_map):
    X, rmd = _setup(fig_map, ("1/2", "17/21"))
    r0 = return_vector(fig_map, rmd, 0, Sign.PLUS)
    assert r0.e_part == (0, 1, 0) and r0.f_part == (0, 0)
    # boundary representative never meets a partition point: product is the
    # branch translation
    assert product(r0, param_vector(fig_map)) == rmd.branches[0].translation

    r1 = return_vector(fig_map, rmd, 1, Sign.PLUS)
    assert r1.e_part == (1, 0, 1) and r1.f_part == (0, 1)
    # anchored at the partition point: product is the landing's return image
    got = product(r1, param_vector(fig_map))
    assert got == Fraction(1, 2)
    assert rmd.J.contains(plus(got))


def test_connection_vectors_empty_chain(fig_map):
    X, rmd = _setup(fig_map, ("1/2", "17/21"))
    assert connection_vectors(fig_map, rmd, 0, Sign.PLUS) == []
    assert connection_vectors(fig_map, rmd, 0, Sign.MINUS) == []


def test_cyclic_chain_bt(bt_fixture):
    P = maximal_periodic_interval(bt_fixture, plus("0"))
    assert P == interval("0", "1/4")
    vs = cyclic_chain_vectors(bt_fixture, P, 3)
    assert len(vs) == 2
    for v in vs:
        assert product(v, param_vector(bt_fixture)) == 0
    # the closing vector wraps through the period
    closing = vs[-1]
    assert sum(closing.e_part) == 2  # wrap: t in [2,3) plus t in [0,1)


def test_assemble_family_fig(fig_map):
    X = attractor(fig_map, 100).X
    fam = assemble_family(fig_map, X, interval("1/2", "17/21"))
    got = {(v.e_part, v.f_part) for v in fam.vectors}
    assert got == {
        ((0, 0, 0), (0, -1)),  # landing
        ((0, 1, 0), (0, 0)),  # boundary-side return
        ((1, 0, 1), (0, 1)),  # landing-side return
        ((1, 0, 0), (1, -1)),  # off-attractor connection
    }
    assert rank(fam) == 4


def test_assemble_family_rejects_boundary_break(bt_fixture):
    X = attractor(bt_fixture, 100).X
    with pytest.raises(FamilyAssemblyError):
        assemble_family(bt_fixture, X, interval("1/2", "1"))
    with pytest.raises(FamilyAssemblyError):
        assemble_family(bt_fixture, X, interval("1/2", "3/4"))


def test_assemble_family_two_branch_rotation():
    m = make_map(["0", "1/3", "1"], ["2/3", "-1/3"])
    X = attractor(m, 100).X
    fam = assemble_family(m, X, X.parts[0])
    assert rank(fam) == len(fam)
    assert len(fam) == 3  # one landing, one return per branch


def test_rank_duplicates_and_empty(fig_map):
    X = attractor(fig_map, 100).X
    fam = assemble_family(fig_map, X, interval("1/2", "17/21"))
    doubled = VectorFamily(fam.vectors + (fam.vectors[0],))
    assert rank(doubled) == len(doubled) - 1
    assert rank(VectorFamily(())) == 0


def test_rank_matches_fraction_elimination():
    rng = random.Random(5)
    for _ in range(30):
        rows = [
            [rng.randint(-4, 4) for _ in range(5)] for _ in range(rng.randint(1, 6))
        ]
        vecs = [CoeffVector(tuple(r[:3]), tuple(r[3:])) for r in rows]
        # plain Fraction elimination as oracle
        mat = [[Fraction(x) for x in r] for r in rows]
        rk = 0
        for col in range(5):
            piv = next((i for i in range(rk, len(mat)) if mat[i][col]), None)
            if piv is None:
                continue
            mat[rk], mat[piv] = mat[piv], mat[rk]
            for i in range(len(mat)):
                if i != rk and mat[i][col]:
                    f = mat[i][col] / mat[rk][col]
                    mat[i] = [a - f * b for a, b in zip(mat[i], mat[rk])]
            rk += 1
        assert rank(vecs) == rk


def test_solve_single_constraint():
    v = CoeffVector((1, 0, 0), (0, 0))
    d = solve_min_norm([(v, Fraction(1, 10))])
    assert d == [Fraction(1, 10), 0, 0, 0, 0]


def test_solve_all_zero_targets(fig_map):
    X = attractor(fig_map, 100).X
    fam = assemble_family(fig_map, X, interval("1/2", "17/21"))
    d = solve_min_norm([(v, Fraction(0)) for v in fam.vectors])
    assert all(x == 0 for x in d)


def test_solve_single_nonzero_target(fig_map):
    X = attractor(fig_map, 100).X
    fam = assemble_family(fig_map, X, interval("1/2", "17/21"))
    eps = Fraction(1, 1000)
    targets = [
        (v, -eps if v.role.startswith("return[1]") else Fraction(0))
        for v in fam.vectors
    ]
    d = solve_min_norm(targets)
    assert any(x != 0 for x in d)
    for v, t in targets:
        assert product(v, d) == t


def test_solve_infeasible():
    v = CoeffVector((1, 0, 0), (0, 0))
    with pytest.raises(Infeasible):
        solve_min_norm([(v, Fraction(1)), (v, Fraction(2))])


def test_perturbation_law_exact(fig_map):
    # certified unchanged itineraries => exact displacement formula
    rng = random.Random(11)
    X = attractor(fig_map, 100).X
    for _ in range(20):
        d = [Fraction(rng.randint(-1, 1), 10000) for _ in range(5)]
        mt = perturbed(fig_map, d)
        if not mt.is_valid():
            continue
        for p in fig_map.critical_points():
            n = rng.randint(1, 8)
            itin = fig_map.itinerary(p, n)
            shifted_start = minus(p.value + d[2 + fig_map.break_index(p.value)]) if p.sign < 0 else plus(p.value + d[2 + fig_map.break_index(p.value)])
            if mt.itinerary(shifted_start, n) != itin:
                continue
            k = fig_map.entry_counts(p, n)
            v = CoeffVector(k, tuple(
                1 if i + 1 == fig_map.break_index(p.value) else 0
                for i in range(fig_map.r - 1)
            ))
            predicted = product(v, d)
            actual = mt.iterate(shifted_start, n).value - fig_map.iterate(p, n).value
            assert actual == predicted


def test_family_csv_dump(fig_map):
    X = attractor(fig_map, 100).X
    fam = assemble_family(fig_map, X, interval("1/2", "17/21"))
    text = fam.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "role,label,e_1,e_2,e_3,f_1,f_2"
    assert len(lines) == 5


def test_random_finite_type_rank_property():
    rng = random.Random(321)
    checked = 0
    for _ in range(40):
        m = random_itm(rng, 3, 16)
        res = attractor(m, 10 * m.denominator_lcm())
        if not res.finite:
            continue
        for comp in res.X:
            if any(b in (comp.left, comp.right) for b in m.interior_breaks()):
                continue
            fam = assemble_family(m, res.X, comp)
            assert rank(fam) == len(fam)
            checked += 1
    assert checked >= 10
