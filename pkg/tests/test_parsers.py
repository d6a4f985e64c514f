import pytest

from trollgraph import errors, parsers


class DescribeJsonLinesParser:
    def it_parses_one_record_per_line(self):
        parser = parsers.JsonLinesParser()
        parser.feed('{"id": "a"}\n{"id": "b"}')
        assert parser.found_records == [(1, {"id": "a"}), (2, {"id": "b"})]

    def it_skips_blank_lines_and_headers_but_counts_them(self):
        parser = parsers.JsonLinesParser()
        parser.feed('#trollgraph v0.1.0 seed=0 cmd=mine\n\n{"id": "a"}')
        assert parser.found_records == [(3, {"id": "a"})]

    def it_collects_malformed_lines(self):
        parser = parsers.JsonLinesParser()
        parser.feed('{"id": "a"}\nnot json\n[1, 2]\n{"id": "b"}')
        assert [line for line, _ in parser.found_records] == [1, 4]
        assert [error.line for error in parser.errors] == [2, 3]
        assert "expected an object" in parser.errors[1].message

    def it_raises_on_the_first_malformed_line_when_strict(self):
        parser = parsers.JsonLinesParser(strict=True)
        with pytest.raises(errors.InvalidRecordError) as info:
            parser.feed('{"id": "a"}\n{"id": ')
        assert info.value.line == 2

    def it_keeps_counting_lines_across_feeds(self):
        parser = parsers.JsonLinesParser()
        parser.feed('{"id": "a"}')
        parser.feed('{"id": "b"}')
        assert [line for line, _ in parser.found_records] == [1, 2]

    def it_can_be_reset(self):
        parser = parsers.JsonLinesParser()
        parser.feed("oops")
        parser.reset()
        parser.feed('{"id": "a"}')
        assert parser.found_records == [(1, {"id": "a"})]
        assert parser.errors == []


class DescribeDelimitedParser:
    def it_maps_rows_to_the_field_names(self):
        parser = parsers.DelimitedParser(["token", "valence"], delimiter="\t")
        parser.feed("good\t1.9\nbad\t-2.5")
        assert [record for _, record in parser.found_records] == [
            {"token": "good", "valence": "1.9"},
            {"token": "bad", "valence": "-2.5"},
        ]

    def it_skips_a_header_row(self):
        parser = parsers.DelimitedParser(["snippet_id", "label"])
        parser.feed("snippet_id,label\ns1,none")
        assert parser.found_records == [(2, {"snippet_id": "s1", "label": "none"})]

    def it_reports_rows_with_the_wrong_number_of_columns(self):
        parser = parsers.DelimitedParser(["a", "b"])
        parser.feed("1,2\n1,2,3")
        assert len(parser.found_records) == 1
        assert parser.errors[0].line == 2
        assert "expected 2 columns, got 3" in parser.errors[0].reason


class DescribeParseJsonLines:
    def it_feeds_every_line(self):
        parser = parsers.parse_json_lines(['{"id": "a"}\n', '{"id": "b"}\n'])
        assert [record["id"] for _, record in parser.found_records] == ["a", "b"]
