"""Hypothesis strategies shared across the test modules."""

from hypothesis import strategies as st

from randvc.structures import Mode, table_from_rows

rationals01 = st.fractions(min_value=0, max_value=1, max_denominator=12)


@st.composite
def tables(draw, mode=None, max_rows=5, max_cols=5):
    mode = mode or draw(st.sampled_from([Mode.CLASSICAL, Mode.CONTINUOUS]))
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    cell = st.sampled_from([0, 1]) if mode is Mode.CLASSICAL else rationals01
    rows = draw(st.lists(st.lists(cell, min_size=c, max_size=c), min_size=r, max_size=r))
    return table_from_rows(rows, mode)
