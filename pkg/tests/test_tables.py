import pytest

from v2vic.tables import COLUMNS, format_csv, format_text, reproduce_tables

# published rows per preset: (exchange lower, exchange upper, n - i, matrix L)
PUBLISHED = {
    "k5-i5": ([5, 13, 21, 29, 37], [6, 18, 30, 40, 50], [5, 15, 25, 35, 45], [5, 15, 25, 35, 45]),
    "k5-i7": ([5, 13, 21, 29, 37], [6, 18, 30, 42, 52], [5, 15, 25, 35, 45], [5, 15, 25, 35, 45]),
    "k7-i7": ([7, 19, 31, 43, 55], [9, 27, 42, 56, 70], [7, 21, 35, 49, 63], [7, 21, 35, 49, 63]),
}


@pytest.fixture(scope="module")
def rows():
    return reproduce_tables()


@pytest.mark.parametrize("preset", sorted(PUBLISHED))
def test_rows_match_published_values(rows, preset):
    mine = [r for r in rows if r.preset == preset]
    lower, upper, bound, matrix = PUBLISHED[preset]
    assert [r.exchange_lower for r in mine] == lower
    assert [r.exchange_upper for r in mine] == upper
    assert [r.n_minus_i for r in mine] == bound
    assert [r.matrix_L for r in mine] == matrix


def test_greedy_exchange_inside_the_envelope(rows):
    for r in rows:
        assert r.exchange_lower <= r.algorithm1 <= r.exchange_upper
        assert r.n_minus_i <= r.algorithm1


def test_text_and_csv_layout(rows):
    text = format_text(rows)
    assert text.splitlines()[0].split() == list(COLUMNS)
    assert len(text.splitlines()) == 16
    csv = format_csv(rows)
    assert csv.splitlines()[1].startswith("k5-i5,5,6,5,10,")


def test_unknown_preset():
    with pytest.raises(KeyError):
        reproduce_tables(["k9-i9"])
