import random
from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from oracles import colorings_have_mono, phi_exists, phi_forall
from randvc.indiscernibles import (
    LemmaVerdict,
    Quantifier,
    RamseyOverflow,
    RowArray,
    a_type,
    alternation,
    array_colors,
    find_monochromatic,
    format_array,
    is_a_indiscernible,
    is_indiscernible,
    is_strongly_a_indiscernible,
    is_strongly_indiscernible,
    lemma_shatter_check,
    parse_array,
    phi_n_type,
    ramsey_extract,
    ramsey_upper_bound,
    shatter_witnesses,
)
from randvc.structures import Mode, gen_halfgraph, gen_powerset, gen_random, table_from_rows
from strategies import tables

E, A = Quantifier.EXISTS, Quantifier.FORALL


def subsets_pairs(n):
    for assign in product(range(3), repeat=n):
        yield (frozenset(i for i, a in enumerate(assign) if a == 0),
               frozenset(i for i, a in enumerate(assign) if a == 1))


# -- phi-n-types ---------------------------------------------------------------


def test_phi_type_small_examples():
    t = table_from_rows([[1], [1]])
    tp = phi_n_type((0, 1), t)
    assert tp[{0, 1}, set(), E]
    assert not tp[set(), {0, 1}, E]
    ident = table_from_rows([[1, 0], [0, 1]])
    assert phi_n_type((0, 1), ident)[{0}, {1}, E]


@settings(max_examples=80)
@given(tables(mode=Mode.CLASSICAL, max_rows=4, max_cols=5), st.data())
def test_phi_type_matches_definition(t, data):
    n = data.draw(st.integers(1, 3))
    rows = data.draw(st.lists(st.integers(0, t.rows - 1), min_size=n, max_size=n))
    tp = phi_n_type(rows, t)
    assert len(tp) == 2 * 3**n
    for Es, Fs in subsets_pairs(n):
        assert tp[Es, Fs, E] == phi_exists(t, rows, Es, Fs)
        assert tp[Es, Fs, A] == phi_forall(t, rows, Es, Fs)


@given(tables(mode=Mode.CLASSICAL, max_rows=4, max_cols=5), st.integers(1, 3))
def test_constant_tuple_type_is_position_free(t, n):
    a = t.rows - 1
    tp = phi_n_type((a,) * n, t)
    for Es, Fs in subsets_pairs(n):
        # with every position the same element only the emptiness of E and F matters
        key = (bool(Es), bool(Fs))
        same = phi_n_type((a,) * n, t)
        assert tp[Es, Fs, E] == same[Es, Fs, E]
        assert tp[Es, Fs, E] == phi_n_type((a, a), t)[
            frozenset([0]) if key[0] else frozenset(),
            frozenset([1]) if key[1] else frozenset(),
            E,
        ]


def test_phi_type_rejects_continuous():
    t = table_from_rows([[Fraction(1, 2)]], Mode.CONTINUOUS)
    with pytest.raises(ValueError):
        phi_n_type((0,), t)


# -- arrays --------------------------------------------------------------------


def test_array_roundtrip_and_validation():
    t = gen_halfgraph(3)
    arr = RowArray(((0, 1), (2, 2)), t)
    assert parse_array(format_array(arr), t) == arr
    with pytest.raises(ValueError):
        RowArray(((0, 1), (2,)), t)
    with pytest.raises(IndexError):
        RowArray(((5,),), t)
    with pytest.raises(ValueError):
        parse_array("array v1 2 1\n0\n", t)


def test_indiscernible_examples():
    ident = table_from_rows([[1, 0], [0, 1]])
    assert is_indiscernible(RowArray.sequence((0, 0, 0), ident), 2)
    assert is_indiscernible(RowArray.sequence((0, 1), ident), 1)
    t = table_from_rows([[1, 1], [0, 0]])
    v = is_indiscernible(RowArray.sequence((0, 1), t), 1)
    assert not v
    assert v.witness == ((0,), (1,), 0)
    with pytest.raises(ValueError):
        is_indiscernible(RowArray.sequence((0,), t), 2)


def _type_oracle(t, rows):
    n = len(rows)
    return tuple((phi_exists(t, rows, Es, Fs), phi_forall(t, rows, Es, Fs)) for Es, Fs in subsets_pairs(n))


@settings(max_examples=60, deadline=None)
@given(tables(mode=Mode.CLASSICAL, max_rows=4, max_cols=5), st.data())
def test_indiscernibility_matches_type_oracle(t, data):
    m = data.draw(st.integers(2, 4))
    k = data.draw(st.integers(1, 2))
    n = data.draw(st.integers(1, min(m, 2)))
    cells = data.draw(st.lists(st.lists(st.integers(0, t.rows - 1), min_size=k, max_size=k),
                               min_size=m, max_size=m))
    arr = RowArray(tuple(map(tuple, cells)), t)
    plain = all(
        len({_type_oracle(t, tuple(cells[i][l] for i in idx)) for idx in combinations(range(m), n)}) == 1
        for l in range(k)
    )
    assert bool(is_indiscernible(arr, n)) == plain
    ref = _type_oracle(t, tuple(cells[i][0] for i in range(n)))
    strong = all(
        _type_oracle(t, tuple(cells[i][c] for i, c in zip(idx, f))) == ref
        for idx in combinations(range(m), n)
        for f in product(range(k), repeat=n)
    )
    assert bool(is_strongly_indiscernible(arr, n)) == strong
    if k == 1:
        assert bool(is_strongly_indiscernible(arr, n)) == bool(is_indiscernible(arr, n))


def test_strong_indiscernibility_counterexample():
    t = table_from_rows([[1, 1], [0, 1]])
    arr = RowArray(((0, 1), (0, 1)), t)
    assert is_indiscernible(arr, 1)
    v = is_strongly_indiscernible(arr, 1)
    assert not v
    assert v.witness[2] == (1,)
    assert is_strongly_indiscernible(RowArray(((1, 1),) * 3, t), 2)


# -- A-types -------------------------------------------------------------------


def test_a_type_examples():
    t = gen_halfgraph(4)
    tp = a_type([(0,), (3,)], t, Fraction(1, 4), Fraction(3, 4), t=2)
    # columns (2, 3) average 0 on row 0 and 1 on row 3
    assert tp[{0}, E]
    assert not tp[{1}, E]
    ones = table_from_rows([[1, 1], [1, 1]])
    tp1 = a_type([(0,), (1,)], ones, Fraction(1, 2), 1)
    assert tp1[set(), E]
    assert not any(tp1[I, E] for I in [{0}, {1}, {0, 1}])
    with pytest.raises(ValueError):
        a_type([(0,)], t, 1, 1)


@settings(max_examples=60, deadline=None)
@given(tables(mode=Mode.CLASSICAL, max_rows=4, max_cols=5), st.data())
def test_a_type_threshold_collapse(t, data):
    n = data.draw(st.integers(1, 3))
    rows = data.draw(st.lists(st.integers(0, t.rows - 1), min_size=n, max_size=n))
    at = a_type([(a,) for a in rows], t, 0, 1, t=1)
    pt = phi_n_type(rows, t)
    full = frozenset(range(n))
    for I in range(1 << n):
        S = frozenset(i for i in range(n) if I >> i & 1)
        # low = phi false, so I plays the role of F and its complement of E
        assert at[S, E] == pt[full - S, S, E]


@settings(max_examples=40, deadline=None)
@given(tables(mode=Mode.CLASSICAL, max_rows=4, max_cols=5), st.data())
def test_a_indiscernibility_collapse(t, data):
    m = data.draw(st.integers(2, 4))
    n = data.draw(st.integers(1, 2))
    k = data.draw(st.integers(1, 2))
    cells = data.draw(st.lists(st.lists(st.integers(0, t.rows - 1), min_size=k, max_size=k),
                               min_size=m, max_size=m))
    arr = RowArray(tuple(map(tuple, cells)), t)
    if k == 1:
        assert bool(is_a_indiscernible(arr, n, 0, 1, t=1)) == bool(is_indiscernible(arr, n))
    assert bool(is_strongly_a_indiscernible(arr, n, 0, 1, t=1)) == bool(is_strongly_indiscernible(arr, n))


def test_a_indiscernible_constant():
    t = gen_random(5, 5, Fraction(1, 2), 3)
    arr = RowArray(((2, 4),) * 4, t)
    assert is_a_indiscernible(arr, 2, Fraction(1, 4), Fraction(3, 4))
    assert is_strongly_a_indiscernible(RowArray(((2, 2),) * 4, t), 2, Fraction(1, 4), Fraction(3, 4))


def test_strongly_a_indiscernible_random_array_by_scan():
    t = gen_random(5, 5, Fraction(1, 2), 3)
    rng = random.Random(3)
    arr = RowArray(tuple(tuple(rng.randrange(5) for _ in range(2)) for _ in range(4)), t)
    r, s = Fraction(1, 4), Fraction(3, 4)
    ref = a_type([(arr.cells[0][0],), (arr.cells[1][0],)], t, r, s, t=2)
    want = all(
        a_type([(arr.cells[i][f[0]],), (arr.cells[j][f[1]],)], t, r, s, t=2) == ref
        for i, j in combinations(range(4), 2)
        for f in product(range(2), repeat=2)
    )
    assert bool(is_strongly_a_indiscernible(arr, 2, r, s)) == want


# -- Ramsey ------------------------------------------------------------------


def test_ramsey_bound_examples():
    assert ramsey_upper_bound(3, 1, 4) == 10
    assert ramsey_upper_bound(2, 2, 3) == 6
    assert ramsey_upper_bound(5, 3, 3) == 3
    assert ramsey_upper_bound(1, 2, 7) == 7
    with pytest.raises(RamseyOverflow, match="2\\^63"):
        ramsey_upper_bound(2**40, 3, 6)
    with pytest.raises(ValueError):
        ramsey_upper_bound(2, 3, 2)


def test_ramsey_bound_is_monotone():
    for n, c, top in [(1, 1, 6), (1, 3, 6), (2, 2, 6), (2, 3, 5), (3, 2, 4)]:
        vals = [ramsey_upper_bound(c, n, m) for m in range(n, top + 1)]
        assert vals == sorted(vals)


def test_r33_exhaustive():
    pairs = list(combinations(range(6), 2))
    for bits in range(1 << len(pairs)):
        col = {p: bits >> i & 1 for i, p in enumerate(pairs)}
        assert colorings_have_mono(6, 2, 3, col.__getitem__)
        assert find_monochromatic(col.__getitem__, 6, 2, 3) is not None


def test_pentagon_has_no_monochromatic_triangle():
    def col(T):
        a, b = T
        return min((b - a) % 5, (a - b) % 5) == 1

    assert find_monochromatic(col, 5, 2, 3) is None


def test_extract_examples():
    t = gen_powerset(2)
    const = RowArray(((1,),) * 5, t)
    ext = ramsey_extract(const, 2, 4)
    assert ext.indices == (0, 1, 2, 3)
    bad = RowArray.sequence((0, 1, 1), gen_powerset(2))
    assert not is_indiscernible(bad, 2)
    assert ramsey_extract(bad, 2, 3) is None
    with pytest.raises(ValueError):
        ramsey_extract(const, 3, 2)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_extraction_is_least_and_rechecks(data):
    t = gen_powerset(2)
    m_arr = data.draw(st.integers(3, 7))
    k = data.draw(st.integers(1, 2))
    cells = tuple(tuple(data.draw(st.integers(0, 1)) for _ in range(k)) for _ in range(m_arr))
    arr = RowArray(cells, t)
    m = data.draw(st.integers(2, min(4, m_arr)))
    for flavor, check in [
        ("plain", lambda a: is_indiscernible(a, 2)),
        ("strong", lambda a: is_strongly_indiscernible(a, 2)),
        ("a_type", lambda a: is_strongly_a_indiscernible(a, 2, 0, 1)),
        ("a_tuple", lambda a: is_a_indiscernible(a, 2, 0, 1)),
    ]:
        ext = ramsey_extract(arr, 2, m, flavor)
        passing = [S for S in combinations(range(m_arr), m) if check(arr.sub(S))]
        if ext is None:
            assert passing == []
        else:
            assert check(ext.array)
            assert ext.indices == passing[0]


def test_extraction_at_bound_length():
    rng = random.Random(1)
    t = gen_powerset(2)
    for _ in range(20):
        arr = RowArray.sequence([rng.randrange(2) for _ in range(6)], t)
        c = len(array_colors(arr, 2))
        assert arr.m >= ramsey_upper_bound(c, 2, 3)
        assert ramsey_extract(arr, 2, 3) is not None


# -- alternation and the shattering lemma ----------------------------------------


def test_alternation_examples():
    t = table_from_rows([[1], [0], [1], [0], [1]])
    assert alternation(t, (0, 2, 4), 0) == 0
    assert alternation(t, (0, 1, 2), 0) == 2
    assert alternation(t, (0, 1, 2, 3, 4), 0) == 4
    c = table_from_rows([[Fraction(1, 3)], [1]], Mode.CONTINUOUS)
    assert alternation(c, (0, 1, 0), 0) == Fraction(4, 3)
    with pytest.raises(ValueError):
        alternation(t, (0,), 0)


def test_lemma_examples():
    t = gen_powerset(3)
    assert lemma_shatter_check(t, (0, 0), 1).verdict is LemmaVerdict.PREMISES_FAIL
    # distinct rows of a power set are indiscernible and the column {0, 2} alternates 3 times
    p4 = gen_powerset(4)
    res = lemma_shatter_check(p4, (0, 1, 2, 3), 2)
    assert res.verdict is LemmaVerdict.SHATTERED
    assert alternation(p4, (0, 1, 2, 3), res.column) >= 3
    assert lemma_shatter_check(gen_powerset(6), tuple(range(6)), 3).verdict is LemmaVerdict.SHATTERED
    # padding by repetition breaks indiscernibility: (a, a) and (a, b) have different types
    assert lemma_shatter_check(t, (0, 1, 2, 0, 1, 2), 2).verdict is LemmaVerdict.PREMISES_FAIL
    with pytest.raises(ValueError):
        lemma_shatter_check(t, (0, 1, 2), 2)


def test_shatter_witnesses():
    t = gen_powerset(2)
    w = shatter_witnesses(t, (0, 1))
    assert w == {frozenset(): 0, frozenset({0}): 1, frozenset({1}): 2, frozenset({0, 1}): 3}
    assert shatter_witnesses(t, (0, 0)) is None


@settings(max_examples=150, deadline=None)
@given(tables(mode=Mode.CLASSICAL, max_rows=6, max_cols=8), st.data())
def test_lemma_never_fails(t, data):
    n = data.draw(st.integers(1, 3))
    seq = data.draw(st.lists(st.integers(0, t.rows - 1), min_size=2 * n, max_size=2 * n + 2))
    assert lemma_shatter_check(t, seq, n).verdict is not LemmaVerdict.COUNTEREXAMPLE
