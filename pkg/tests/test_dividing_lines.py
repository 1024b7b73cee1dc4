import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import average, ladder_dfs_oracle, ladder_oracle, rvc_oracle, sop_oracle, table_ladder_oracle, vc_oracle
from randvc.bounds import stability_bound
from randvc.dividing_lines import (
    LadderWitness,
    SOPChain,
    ladder_from_shatter,
    ladder_from_sop,
    ladder_index,
    measure_ladder,
    multisets,
    randomized_ladder,
    randomized_vc,
    sop_chain,
    vc_dim,
)
from randvc.randomization import ProbSpace, RandomElement, bracket_prob
from randvc.structures import Mode, gen_halfgraph, gen_intervals, gen_powerset, table_from_rows
from strategies import tables

Q, H = Fraction(1, 4), Fraction(3, 4)


def zeros(r, c):
    return table_from_rows([[0] * c for _ in range(r)])


def ones(r, c):
    return table_from_rows([[1] * c for _ in range(r)])


# -- spec-level examples -------------------------------------------------------


def test_vc_examples():
    assert vc_dim(gen_powerset(3)).value == 3
    assert vc_dim(gen_halfgraph(5)).value == 1
    assert vc_dim(gen_intervals(6)).value == 2
    res = vc_dim(gen_intervals(6))
    assert res.witness.rows == (0, 1)
    assert res.witness.verify(gen_intervals(6))
    assert vc_dim(zeros(3, 2)).value == 0
    with pytest.raises(ValueError):
        vc_dim(table_from_rows([[Fraction(1, 2)]], Mode.CONTINUOUS))


def test_vc_cap_is_reported():
    res = vc_dim(gen_powerset(4), n_max=2)
    assert res.value == 2 and res.capped
    at_cap = vc_dim(gen_powerset(4), n_max=4)
    assert at_cap.value == 4 and at_cap.capped
    above = vc_dim(gen_powerset(4), n_max=5)
    assert above.value == 4 and not above.capped


def test_ladder_examples():
    for n in range(1, 8):
        res = ladder_index(gen_halfgraph(n))
        assert res.value == n
        assert res.witness.verify(gen_halfgraph(n))
    assert ladder_index(zeros(3, 3)).value == 0
    assert ladder_index(gen_powerset(3)).value == 3
    with pytest.raises(ValueError):
        ladder_index(gen_halfgraph(2), 1, 1)
    capped = ladder_index(gen_halfgraph(6), n_max=4)
    assert capped.value == 4 and capped.capped


def test_sop_examples():
    for n in range(1, 7):
        assert sop_chain(gen_halfgraph(n)).value == n
    assert sop_chain(ones(3, 4)).value == 1
    res = sop_chain(gen_powerset(2))
    assert res.value == 3
    assert res.witness.cols == (0, 1, 3)
    assert res.witness.verify(gen_powerset(2))
    with pytest.raises(ValueError):
        sop_chain(gen_halfgraph(2), 0)


def test_randomized_examples():
    assert randomized_vc(ones(3, 3), Fraction(1, 2), 1, 2, 2).value == 0
    assert randomized_ladder(ones(3, 3), Fraction(1, 2), 1, 2).value == 1
    assert measure_ladder(zeros(3, 3), 0, 1, 2).value == 0
    hg = gen_halfgraph(6)
    res = randomized_vc(hg, Q, H, 2, 2)
    assert res.value == rvc_oracle(hg, Q, H, 2, 2)
    assert res.witness.verify(hg)
    ml = measure_ladder(gen_halfgraph(5), Q, H, 2)
    assert ml.value >= ladder_index(gen_halfgraph(5), Q, H).value
    assert ml.witness.verify(gen_halfgraph(5))
    rl = randomized_ladder(gen_halfgraph(4), Q, H, 2)
    assert rl.witness.verify(gen_halfgraph(4))
    assert rl.value <= stability_bound(4, Q, H, 2).N_bound
    for fn in (measure_ladder, randomized_ladder):
        with pytest.raises(ValueError):
            fn(hg, H, Q, 1)


def test_pinned_randomized_values():
    h6, h5, h4 = gen_halfgraph(6), gen_halfgraph(5), gen_halfgraph(4)
    assert randomized_vc(h6, Q, H, 2, 2).value == 1
    assert measure_ladder(h5, Q, H, 2).value == 5
    assert randomized_ladder(h4, Q, H, 2).value == 4
    m5, m4 = multisets(5, 2), multisets(4, 2)
    assert ladder_dfs_oracle(lambda mu, b: average(h5, mu, (b,)), m5, range(5), Q, H) == 5
    assert ladder_dfs_oracle(lambda mu, nu: average(h4, mu, nu), m4, m4, Q, H) == 4


def test_multisets_order():
    assert multisets(3, 2) == [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]


# -- oracle agreement ----------------------------------------------------------

small_classical = tables(mode=Mode.CLASSICAL, max_rows=4, max_cols=5)
small_any = tables(max_rows=3, max_cols=4)
thresholds = st.sampled_from([(Fraction(0), Fraction(1)), (Q, H), (Fraction(1, 3), Fraction(1, 2))])


@settings(max_examples=80, deadline=None)
@given(small_classical)
def test_vc_matches_oracle(t):
    res = vc_dim(t)
    assert res.value == vc_oracle(t)
    assert res.witness.verify(t)
    assert res.value <= t.rows
    assert 2**res.value <= t.cols


@settings(max_examples=60, deadline=None)
@given(small_any, thresholds)
def test_ladder_matches_oracle(t, rs):
    r, s = rs
    res = ladder_index(t, r, s)
    assert res.value == table_ladder_oracle(t, r, s)
    assert res.witness.verify(t)


@settings(max_examples=60, deadline=None)
@given(small_any, st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(1, 5)]))
def test_sop_matches_oracle(t, eps):
    res = sop_chain(t, eps)
    assert res.value == sop_oracle(t, eps)
    assert res.witness.verify(t)


@settings(max_examples=30, deadline=None)
@given(tables(max_rows=3, max_cols=3), thresholds, st.integers(1, 2), st.integers(1, 2))
def test_rvc_matches_oracle(t, rs, k, t_max):
    r, s = rs
    res = randomized_vc(t, r, s, k, t_max)
    assert res.value == rvc_oracle(t, r, s, k, t_max)
    if res.value:
        assert res.witness.verify(t)


@settings(max_examples=25, deadline=None)
@given(tables(max_rows=3, max_cols=3), thresholds)
def test_measure_ladders_match_oracle(t, rs):
    r, s = rs
    mus = multisets(t.rows, 2)
    nus = multisets(t.cols, 2)
    ml = measure_ladder(t, r, s, 2)
    assert ml.value == ladder_oracle(lambda mu, b: average(t, mu, (b,)), mus, range(t.cols), r, s)
    rl = randomized_ladder(t, r, s, 2, n_max=3)
    assert rl.value == ladder_oracle(lambda mu, nu: average(t, mu, nu), mus, nus, r, s, n_max=3)
    assert ml.witness.verify(t) and rl.witness.verify(t)


# -- collapse identities and constructive reductions ----------------------------


@settings(max_examples=80, deadline=None)
@given(tables(mode=Mode.CLASSICAL, max_rows=6, max_cols=8))
def test_point_mass_collapses(t):
    assert randomized_vc(t, 0, 1, 1, 1).value == vc_dim(t).value
    assert measure_ladder(t, 0, 1, 1).value == ladder_index(t).value
    assert randomized_ladder(t, 0, 1, 1).value == ladder_index(t).value


@settings(max_examples=80, deadline=None)
@given(tables(mode=Mode.CLASSICAL, max_rows=6, max_cols=8))
def test_shattering_and_chains_give_ladders(t):
    sh = vc_dim(t)
    lad = ladder_from_shatter(sh.witness)
    assert len(lad) == sh.value and lad.verify(t)
    ch = sop_chain(t)
    lad2 = ladder_from_sop(ch.witness)
    assert len(lad2) == ch.value - 1 and lad2.verify(t)
    assert ladder_index(t).value >= max(sh.value, ch.value - 1)


@settings(max_examples=40, deadline=None)
@given(tables(max_rows=4, max_cols=4), st.integers(1, 2))
def test_monotone_in_thresholds(t, k):
    grid = [(Fraction(1, 2) - d, Fraction(1, 2) + d) for d in (Fraction(0), Fraction(1, 8), Fraction(1, 4), Fraction(1, 2))]
    grid[0] = (Fraction(1, 2), Fraction(1, 2) + Fraction(1, 100))
    for fn in (
        lambda r, s: randomized_vc(t, r, s, k, 2).value,
        lambda r, s: ladder_index(t, r, s).value,
        lambda r, s: measure_ladder(t, r, s, k).value,
        lambda r, s: randomized_ladder(t, r, s, k, n_max=4).value,
    ):
        vals = [fn(r, s) for r, s in grid]
        assert vals == sorted(vals, reverse=True)


def test_witness_rejects_bad_data():
    t = gen_halfgraph(3)
    assert not LadderWitness((0, 1), (1, 0), Fraction(0), Fraction(1)).verify(t)
    assert not SOPChain((2, 1), (0,), Fraction(1)).verify(t)


@settings(max_examples=60, deadline=None)
@given(small_any, st.data())
def test_chains_survive_randomization(t, data):
    ch = sop_chain(t, Fraction(1, 4)).witness
    w = data.draw(st.lists(st.integers(1, 5), min_size=1, max_size=4))
    om = ProbSpace(tuple(Fraction(x, sum(w)) for x in w))
    f = RandomElement(om, tuple(data.draw(st.integers(0, t.rows - 1)) for _ in w))
    vals = [bracket_prob(f, RandomElement.constant(om, c), t) for c in ch.cols]
    assert vals == sorted(vals)
    # constant elements reproduce the table itself
    for b in range(t.rows):
        for c in ch.cols:
            assert bracket_prob(RandomElement.constant(om, b), RandomElement.constant(om, c), t) == t[b, c]


def test_full_strictness_holds_on_classical_chains():
    rng = random.Random(0)
    for _ in range(50):
        t = table_from_rows([[rng.randrange(2) for _ in range(6)] for _ in range(5)])
        ch = sop_chain(t).witness
        assert ch.full_strictness(t)


def test_full_strictness_can_fail_on_continuous_chains():
    t = table_from_rows(
        [[0, Fraction(1, 2), Fraction(1, 2)], [Fraction(1, 4), Fraction(1, 4), Fraction(3, 4)]], Mode.CONTINUOUS
    )
    ch = sop_chain(t, Fraction(1, 2)).witness
    assert ch.verify(t) and len(ch) == 3
    assert not ch.full_strictness(t)


def test_certificate_json_shape():
    res = vc_dim(gen_powerset(2)).to_json()
    assert set(res) == {"index_name", "value", "capped", "witness", "params"}
    assert res["witness"]["witness_cols"][0] == {"subset": [], "col": 0}
    rv = randomized_vc(gen_halfgraph(3), Q, H, 2, 2).to_json()
    assert rv["params"]["r"] == "1/4"


def test_rvc_cap():
    res = randomized_vc(gen_powerset(3), 0, 1, 1, 1, n_max=2)
    assert res.value == 2 and res.capped
    full = randomized_vc(gen_powerset(3), 0, 1, 1, 1)
    assert full.value == 3 and not full.capped
