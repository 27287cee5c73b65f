"""Parser and canonical printer: round trips, diagnostics, totality."""

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from rrlang import dsl, ir

ROUND_TRIP_SOURCE = """\
@level(E1)
@domain(apples)
class Tally {
    private:
        Person p;
        APP_Set app_set;
        int result;
    protected:
        int Counting() {
            APPLE item;
            item = app_set.First();
            while (item != NULL) {
                p.PointTo(item);
                result++;
                item = app_set.Next();
            }
            return result;
        }
}
"""


class TestFixtures:
    def test_all_fixtures_round_trip_byte_exactly(self):
        for name in dsl.FIXTURE_NAMES:
            source = dsl.fixture_source(name)
            units = dsl.parse(source)
            printed = dsl.print_canonical(units)
            assert printed.text == source.text, name

    def test_load_fixture_unit_counts(self):
        assert len(dsl.load_fixture("counting_apples_i")) == 1
        assert len(dsl.load_fixture("counting_e3")) == 3
        assert len(dsl.load_fixture("globals")) == 1

    def test_unknown_fixture(self):
        with pytest.raises(KeyError):
            dsl.load_fixture("nope")


class TestRoundTrip:
    def test_canonical_is_idempotent(self):
        units = dsl.parse(ROUND_TRIP_SOURCE)
        once = dsl.print_canonical(units)
        twice = dsl.print_canonical(dsl.parse(once))
        assert once.text == twice.text

    def test_increment_spelling_is_canonical(self):
        plain = ROUND_TRIP_SOURCE.replace("result++;", "result = result + 1;")
        units = dsl.parse(plain)
        assert "result++;" in dsl.print_canonical(units).text


class TestDiagnostics:
    def test_syntax_error_carries_position(self):
        with pytest.raises(dsl.ParseFailure) as exc:
            dsl.parse("class {")
        error = exc.value.errors[0]
        assert error.line == 1
        assert error.column >= 1

    def test_missing_annotations_rejected(self):
        with pytest.raises(dsl.ParseFailure):
            dsl.parse("class Tally { }")

    def test_discipline_violations_fail_parse(self):
        # A class annotated I: recordings are instances, not classes.
        bad = ROUND_TRIP_SOURCE.replace("@level(E1)", "@level(I)")
        with pytest.raises(dsl.ParseFailure):
            dsl.parse(bad)

    def test_e1_public_operation_fails_parse(self):
        bad = ROUND_TRIP_SOURCE.replace("protected:", "public:")
        with pytest.raises(dsl.ParseFailure):
            dsl.parse(bad)

    def test_origin_is_reported(self):
        with pytest.raises(dsl.ParseFailure) as exc:
            dsl.parse(dsl.SourceText("junk", origin="episode.rr"))
        assert "episode.rr" in str(exc.value)


class TestTotality:
    @given(st.text(max_size=2048))
    @settings(max_examples=300, deadline=None)
    def test_arbitrary_text_parses_or_diagnoses(self, text):
        try:
            units = dsl.parse(text)
        except dsl.ParseFailure:
            return
        for unit in units:
            assert ir.validate(unit) == []

    @given(st.binary(max_size=4096))
    @settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
    def test_arbitrary_bytes_never_crash(self, blob):
        text = blob.decode("utf-8", errors="replace")
        try:
            dsl.parse(text)
        except dsl.ParseFailure:
            pass

    def test_large_input_stays_bounded(self):
        big = ROUND_TRIP_SOURCE * 2600  # roughly 1MB of source
        assert len(big) > 1_000_000
        # No hang and no non-ParseFailure crash on large input.
        units = dsl.parse(big)
        assert len(units) == 2600


class TestMutants:
    @given(st.data())
    @settings(max_examples=120, deadline=None)
    def test_mutated_fixture_text_is_total(self, data):
        name = data.draw(st.sampled_from(dsl.FIXTURE_NAMES))
        text = dsl.fixture_source(name).text
        pos = data.draw(st.integers(min_value=0, max_value=len(text) - 1))
        replacement = data.draw(st.sampled_from(list(" ;{}()=+abcZ9@\n")))
        mutated = text[:pos] + replacement + text[pos + 1:]
        try:
            units = dsl.parse(mutated)
        except dsl.ParseFailure:
            return
        printed = dsl.print_canonical(units)
        assert dsl.print_canonical(dsl.parse(printed)).text == printed.text
