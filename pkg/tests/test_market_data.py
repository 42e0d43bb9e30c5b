import math
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crashtopo.errors import AlignmentError, InsufficientDataError, ParseError, ValidationError
from crashtopo.market_data import (
    PriceMatrix,
    PriceTable,
    align,
    fetch_prices,
    load_price_csv,
    log_returns,
    parse_price_csv,
    point_cloud,
)

D = date(2020, 1, 2)


def table(symbol, dates, closes=None):
    closes = closes or [100.0 + i for i in range(len(dates))]
    return PriceTable(symbol, tuple(zip(dates, closes)))


def days(*offsets):
    return [D + timedelta(days=k) for k in offsets]


class TestLoadPriceCsv:
    def test_two_rows_echoed(self, write_csv):
        path = write_csv("AAA.csv", "Date,Close\n2020-01-02,100.0\n2020-01-03,101.0\n")
        t = load_price_csv(path)
        assert t.symbol == "AAA"
        assert t.rows == ((date(2020, 1, 2), 100.0), (date(2020, 1, 3), 101.0))

    def test_zero_close_names_line(self, write_csv):
        path = write_csv("Z.csv", "Date,Close\n2020-01-02,100\n2020-01-03,0\n")
        with pytest.raises(ValidationError, match="line 3"):
            load_price_csv(path)

    def test_negative_close_rejected(self, write_csv):
        path = write_csv("N.csv", "Date,Close\n2020-01-02,-5\n")
        with pytest.raises(ValidationError):
            load_price_csv(path)

    def test_out_of_order_rows_sorted(self, write_csv):
        rows = [("2020-01-07", 3.0), ("2020-01-02", 1.0), ("2020-01-09", 4.0), ("2020-01-03", 2.0)]
        text = "Date,Close\n" + "".join(f"{d},{c}\n" for d, c in rows)
        t = load_price_csv(write_csv("S.csv", text))
        expected = sorted((date.fromisoformat(d), c) for d, c in rows)
        assert list(t.rows) == expected

    def test_duplicate_date_rejected(self, write_csv):
        path = write_csv("D.csv", "Date,Close\n2020-01-02,1\n2020-01-02,2\n")
        with pytest.raises(ValidationError, match="duplicate"):
            load_price_csv(path)

    def test_malformed_row_has_line_number(self, write_csv):
        path = write_csv("M.csv", "Date,Close\n2020-01-02,1\n2020-01-03,abc\n")
        with pytest.raises(ParseError) as info:
            load_price_csv(path)
        assert info.value.line == 3

    def test_bad_date(self, write_csv):
        with pytest.raises(ParseError, match="bad date"):
            load_price_csv(write_csv("B.csv", "Date,Close\n02/01/2020,1\n"))

    def test_missing_column(self, write_csv):
        with pytest.raises(ParseError, match="Close"):
            load_price_csv(write_csv("C.csv", "Date,Open\n2020-01-02,1\n"))

    def test_custom_columns(self, write_csv):
        path = write_csv("Y.csv", "day,Open,Adj Close\n2020-01-02,1,5.5\n")
        t = load_price_csv(path, date_column="day", close_column="Adj Close")
        assert t.closes == [5.5]

    def test_csv_round_trip(self, write_csv):
        t = table("R", days(0, 1, 2), [1.25, 3.0, 1e-3])
        assert load_price_csv(write_csv("R.csv", t.to_csv())) == t


class TestFetch:
    CSV = b"Date,Open,Close,Adj Close\n2020-01-02,1,100,99\n2020-01-03,1,101,null\n2020-01-06,1,102,101\n"

    def test_matches_local_fixture(self, price_server, write_csv):
        endpoint, routes = price_server
        body = b"Date,Close\n2020-01-02,100.0\n2020-01-03,101.0\n"
        routes["AAA"] = (200, body)
        res = fetch_prices(["AAA"], date(2020, 1, 1), date(2020, 2, 1), endpoint, close_column="Close")
        assert res.ok
        assert res.tables == [load_price_csv(write_csv("AAA.csv", body.decode()))]

    def test_adjusted_close_default_skips_nulls(self, price_server):
        endpoint, routes = price_server
        routes["X"] = (200, self.CSV)
        res = fetch_prices(["X"], date(2020, 1, 1), date(2020, 2, 1), endpoint)
        (t,) = res.tables
        assert t.column == "Adj Close"
        assert t.closes == [99.0, 101.0]

    def test_one_404_among_three(self, price_server):
        endpoint, routes = price_server
        routes["A"] = (200, self.CSV)
        routes["C"] = (200, self.CSV)
        res = fetch_prices(["A", "B", "C"], date(2020, 1, 1), date(2020, 2, 1), endpoint)
        assert [t.symbol for t in res.tables] == ["A", "C"]
        assert len(res.errors) == 1
        assert res.errors[0].symbol == "B" and "404" in res.errors[0].reason

    def test_empty_payload(self, price_server):
        endpoint, routes = price_server
        routes["E"] = (200, b"")
        res = fetch_prices(["E"], date(2020, 1, 1), date(2020, 2, 1), endpoint)
        assert not res.tables and "empty" in res.errors[0].reason

    def test_unreachable_endpoint(self):
        res = fetch_prices(["A"], date(2020, 1, 1), date(2020, 2, 1), "http://127.0.0.1:9/{symbol}", timeout=2)
        assert res.tables == []
        assert len(res.errors) == 1


class TestAlign:
    def test_identical_dates_keep_all_rows(self):
        m = align([table("A", days(0, 1, 2)), table("B", days(0, 1, 2))])
        assert m.values.shape == (3, 2)
        assert m.symbols == ("A", "B")

    def test_intersection(self):
        a = table("A", days(1, 2, 3), [1.0, 2.0, 3.0])
        b = table("B", days(2, 3, 4), [20.0, 30.0, 40.0])
        m = align([a, b])
        assert list(m.dates) == sorted(set(a.dates) & set(b.dates))
        np.testing.assert_array_equal(m.values, [[2.0, 20.0], [3.0, 30.0]])

    def test_disjoint_dates(self):
        with pytest.raises(AlignmentError):
            align([table("A", days(0, 1)), table("B", days(5, 6))])

    def test_empty_input(self):
        with pytest.raises(AlignmentError):
            align([])

    def test_column_order_follows_input(self):
        m = align([table("Z", days(0, 1)), table("A", days(0, 1))])
        assert m.symbols == ("Z", "A")

    @given(st.permutations(list(range(6))))
    def test_row_order_insensitive(self, perm):
        rows = [(D + timedelta(days=k), 10.0 + k) for k in range(6)]
        text = "Date,Close\n" + "".join(f"{rows[i][0]},{rows[i][1]}\n" for i in perm)
        other = table("B", [r[0] for r in rows])
        got = align([parse_price_csv(text, "A"), other])
        ref = align([PriceTable("A", tuple(rows)), other])
        assert got.dates == ref.dates
        assert np.array_equal(got.values, ref.values)


class TestLogReturns:
    def matrix(self, col):
        return PriceMatrix(("A",), tuple(days(*range(len(col)))), np.array(col, dtype=float)[:, None])

    def test_constant_prices(self):
        r = log_returns(self.matrix([100, 100, 100]))
        np.testing.assert_array_equal(r.values[:, 0], [0.0, 0.0])

    def test_single_step(self):
        r = log_returns(self.matrix([100, 110]))
        assert r.values[0, 0] == pytest.approx(math.log(1.1), abs=1e-15)
        assert r.values[0, 0] == pytest.approx(0.0953102, abs=1e-7)

    def test_dates_shift_to_later_day(self):
        m = self.matrix([1, 2, 3])
        assert log_returns(m).dates == m.dates[1:]

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            log_returns(self.matrix([1.0]))

    def test_scale_by_seven(self):
        rng = np.random.default_rng(3)
        prices = np.exp(rng.normal(0, 0.02, (50, 4)).cumsum(axis=0)) * 100
        m1 = PriceMatrix(tuple("ABCD"), tuple(days(*range(50))), prices)
        m7 = PriceMatrix(m1.symbols, m1.dates, prices * 7)
        np.testing.assert_allclose(log_returns(m7).values, log_returns(m1).values, rtol=0, atol=1e-15)

    @given(st.integers(-20, 20))
    def test_power_of_two_scaling_bit_identical(self, e):
        rng = np.random.default_rng(11)
        prices = np.exp(rng.normal(0, 0.02, (30, 3)).cumsum(axis=0)) * 50
        m1 = PriceMatrix(tuple("ABC"), tuple(days(*range(30))), prices)
        m2 = PriceMatrix(m1.symbols, m1.dates, prices * 2.0**e)
        assert np.array_equal(log_returns(m1).values, log_returns(m2).values)
        assert np.array_equal(point_cloud(log_returns(m1)).points, point_cloud(log_returns(m2)).points)

    @settings(max_examples=50)
    @given(st.lists(st.floats(-0.2, 0.2), min_size=1, max_size=40))
    def test_round_trip_with_cumulative_exp(self, rets):
        prices = 100 * np.exp(np.concatenate([[0.0], np.cumsum(rets)]))
        r = log_returns(self.matrix(list(prices)))
        np.testing.assert_allclose(r.values[:, 0], rets, atol=1e-12)


class TestPointCloud:
    def test_reshape(self):
        m = PriceMatrix(("A", "B"), tuple(days(0, 1, 2, 3)), np.arange(1.0, 9.0).reshape(4, 2))
        cloud = point_cloud(log_returns(m))
        assert cloud.points.shape == (3, 2)
        assert cloud.dates == m.dates[1:]

    @pytest.mark.parametrize("n", [20, 5])
    def test_dimension_follows_universe(self, n):
        rng = np.random.default_rng(n)
        prices = np.exp(rng.normal(0, 0.01, (40, n)).cumsum(axis=0))
        m = PriceMatrix(tuple(f"S{i}" for i in range(n)), tuple(days(*range(40))), prices)
        assert point_cloud(log_returns(m)).dim == n

    def test_immutable(self):
        m = PriceMatrix(("A",), tuple(days(0, 1)), np.array([[1.0], [2.0]]))
        with pytest.raises(ValueError):
            m.values[0, 0] = 5.0
