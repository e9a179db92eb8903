"""Date grammar, table parsing, surname repair, gender, and gold diffing."""

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kleio.errors import (
    HeaderUnrecognized,
    NoTableFound,
    PageTooLarge,
    ValidationError,
)
from kleio.gateway import MockChatBackend, ModelProfile
from kleio.genealogy import (
    EXTRACTION_PROMPT,
    PersonRecord,
    build_extraction_prompt,
    diff_extraction,
    extract_from_pages,
    infer_gender,
    parse_person_table,
    read_records_csv,
    repair_compound_surnames,
    validate_date,
    write_records_csv,
)

_DAYS = (31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)


def oracle_accepts(text):
    """Reference grammar: Unknown literal, or strict DD-MM-YYYY."""
    stripped = text.strip()
    if stripped.casefold() == "unknown":
        return True
    match = re.fullmatch(r"(\d{2})-(\d{2})-(\d{4})", stripped)
    if not match:
        return False
    day, month = int(match.group(1)), int(match.group(2))
    return 1 <= month <= 12 and 1 <= day <= _DAYS[month - 1]


class TestValidateDate:
    def test_valid_date(self):
        date = validate_date("15-03-1671")
        assert (date.day, date.month, date.year) == (15, 3, 1671)

    def test_renders_back(self):
        assert validate_date("15-03-1671").render() == "15-03-1671"
        assert validate_date("Unknown").render() == "Unknown"

    def test_unknown_case_insensitive(self):
        for text in ("Unknown", "unknown", "UNKNOWN"):
            assert validate_date(text).is_unknown

    def test_iso_order_rejected(self):
        with pytest.raises(ValidationError):
            validate_date("1671-03-15")

    def test_day_out_of_range(self):
        with pytest.raises(ValidationError):
            validate_date("32-01-1700")

    def test_day_zero(self):
        with pytest.raises(ValidationError):
            validate_date("00-01-1700")

    def test_month_out_of_range(self):
        with pytest.raises(ValidationError):
            validate_date("15-13-1700")

    def test_month_length_respected(self):
        with pytest.raises(ValidationError):
            validate_date("31-04-1700")
        assert validate_date("29-02-1700").day == 29  # year-agnostic February

    def test_error_carries_raw(self):
        with pytest.raises(ValidationError) as err:
            validate_date("March 15, 1671")
        assert err.value.raw == "March 15, 1671"

    @given(st.text(alphabet="0123456789-Unknow ", min_size=0, max_size=14))
    @settings(max_examples=300, deadline=None)
    def test_agrees_with_reference_oracle(self, text):
        try:
            validate_date(text)
            accepted = True
        except ValidationError:
            accepted = False
        assert accepted == oracle_accepts(text)


class TestInferGender:
    @pytest.mark.parametrize("name,expected", [
        ("Domingo de Ajuría", "Male"),
        ("Isabel de Mendibíl", "Female"),
        ("Francisco de Ajuria y Mendibil", "Male"),
        ("Tomás de Ajuria y Urratia", "Male"),
        ("Elena Goiri e Irizarri", "Female"),
        ("María Josefa de la Cruz", "Female"),
        ("José María Heredia", "Male"),  # first token decides compounds
    ])
    def test_dictionary_names(self, name, expected):
        assert infer_gender(name) == expected

    def test_ending_heuristic(self):
        assert infer_gender("Zutanita Perez") == "Female"  # -a, not in dictionary
        assert infer_gender("Zutanito Perez") == "Male"    # -o

    def test_unknown_fallback(self):
        assert infer_gender("X de Y") == "Unknown"

    def test_total_on_odd_input(self):
        assert infer_gender("   ") == "Unknown"
        assert infer_gender("123") == "Unknown"

    def test_deterministic(self):
        assert all(infer_gender("Ana Luisa") == "Female" for _ in range(3))


class TestBuildExtractionPrompt:
    def test_prompt_tail(self):
        prompt = build_extraction_prompt("Some page text.", ModelProfile())
        assert prompt.startswith("Some page text.")
        assert prompt.endswith("add a column Gender.")
        assert "format DD-MM-YYYY" in prompt
        for column in ("relationship", "place of birth", "baptism date",
                       "marriage date", "place of residence", "occupation"):
            assert column in EXTRACTION_PROMPT

    def test_empty_page_rejected(self):
        with pytest.raises(ValueError):
            build_extraction_prompt("   ", ModelProfile())

    def test_page_too_large(self):
        with pytest.raises(PageTooLarge):
            build_extraction_prompt("x" * 100_000, ModelProfile(context_tokens=4096))


class TestParsePersonTable:
    def test_parses_fixture(self, raw_extraction_table):
        records = parse_person_table(raw_extraction_table)
        assert len(records) == 7
        assert records[0].full_name == "Domingo de Ajuría"
        assert records[0].place_of_birth == "Ubidea"
        assert records[0].gender == "Male"
        tomas = records[4]
        assert tomas.full_name == "Tomás de Ajuria"
        assert tomas.marriage_date.render() == "12-08-1693"
        assert tomas.date_of_birth.render() == "15-03-1671"
        assert tomas.children == ("Francisco de Ajuria",)

    def test_gender_sequence(self, raw_extraction_table):
        records = parse_person_table(raw_extraction_table)
        assert [r.gender for r in records] == [
            "Male", "Female", "Male", "Female", "Male", "Female", "Male",
        ]

    def test_header_only_table(self):
        text = "| Full Name | Gender |\n|---|---|\n"
        assert parse_person_table(text) == []

    def test_no_table(self):
        with pytest.raises(NoTableFound):
            parse_person_table("Just prose, no table at all.")

    def test_unrecognized_header(self):
        with pytest.raises(HeaderUnrecognized):
            parse_person_table("| Apellido | Nacimiento |\n| x | y |\n")

    def test_header_synonyms(self):
        text = ("| name | Birth Date | Spouse |\n"
                "| Juan Perez | 01-01-1800 | Rosa Gil |\n")
        (record,) = parse_person_table(text)
        assert record.full_name == "Juan Perez"
        assert record.date_of_birth.render() == "01-01-1800"
        assert record.spouse_name == "Rosa Gil"

    def test_bare_pipe_rows_without_markdown_divider(self):
        text = ("Full Name | Date of Birth\n"
                "Ana Soler | Unknown\n")
        (record,) = parse_person_table(text)
        assert record.full_name == "Ana Soler"
        assert record.date_of_birth.is_unknown

    def test_bad_date_row_skipped(self, caplog):
        text = ("| Full Name | Date of Birth |\n"
                "| Good Person | 01-01-1800 |\n"
                "| Bad Person | yesterday |\n")
        with caplog.at_level("WARNING"):
            records = parse_person_table(text)
        assert [r.full_name for r in records] == ["Good Person"]

    def test_children_split_on_semicolon(self):
        text = ("| Full Name | Children |\n"
                "| P | Ana; Juan ; Rosa |\n")
        (record,) = parse_person_table(text)
        assert record.children == ("Ana", "Juan", "Rosa")


class TestRecordsCsvRoundTrip:
    def test_round_trip_fixed_point(self, tmp_path, raw_extraction_table):
        records = parse_person_table(raw_extraction_table)
        path = tmp_path / "records.csv"
        write_records_csv([(0, r) for r in records], path)
        restored = [r for _, r in read_records_csv(path)]
        assert restored == records
        # serialize(parse(serialize(x))) is a fixed point
        path2 = tmp_path / "again.csv"
        write_records_csv([(0, r) for r in restored], path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_rfc4180_edge_cases(self, tmp_path):
        record = PersonRecord(
            full_name='Name, with "comma"',
            occupation="line\nbreak",
            children=("A; sort of", "B"),
        )
        path = tmp_path / "edge.csv"
        write_records_csv([(3, record)], path)
        ((page, restored),) = read_records_csv(path)
        assert page == 3
        assert restored.full_name == 'Name, with "comma"'
        assert restored.occupation == "line\nbreak"


class TestRepairCompoundSurnames:
    def test_fixture_suggestions(self, raw_extraction_table, family_page):
        records = parse_person_table(raw_extraction_table)
        suggestions = repair_compound_surnames(records, family_page)
        by_name = {}
        for record, suggestion in suggestions:
            by_name.setdefault(record.full_name, set()).add(suggestion)
        assert "Francisco de Ajuria y Mendibil" in by_name["Francisco de Ajuria"]
        assert "Francisco de Ajuria y Goiri" in by_name["Francisco de Ajuria"]
        assert by_name["Tomás de Ajuria"] == {"Tomás de Ajuria y Urratia"}
        assert by_name["Isabel Urratia"] == {"Isabel Urratia y Gordobil"}

    def test_no_suggestion_without_continuation(self):
        records = [PersonRecord(full_name="Domingo de Ajuría")]
        source = "Domingo de Ajuría, natural de Ubidea, casó con Isabel."
        assert repair_compound_surnames(records, source) == []

    def test_records_not_mutated(self, raw_extraction_table, family_page):
        records = parse_person_table(raw_extraction_table)
        before = list(records)
        repair_compound_surnames(records, family_page)
        assert records == before

    def test_lowercase_continuation_ignored(self):
        records = [PersonRecord(full_name="Pedro Gil")]
        source = "Pedro Gil y sus hermanos fueron a la villa."
        assert repair_compound_surnames(records, source) == []

    def test_accent_insensitive_name_match(self):
        records = [PersonRecord(full_name="Tomas de Ajuria")]  # no accent
        source = "Tomás de Ajuria y Urratia, bautizado en Ubidea."
        ((_, suggestion),) = repair_compound_surnames(records, source)
        assert suggestion == "Tomas de Ajuria y Urratia"


class TestDiffExtraction:
    def test_identical_lists_are_clean(self, raw_extraction_table):
        records = parse_person_table(raw_extraction_table)
        diff = diff_extraction(records, records)
        assert diff.total("missing") == 0
        assert diff.total("wrong") == 0
        assert diff.total("spurious") == 0
        assert diff.ambiguous == []

    def test_empty_got_all_missing(self, gold_records_csv):
        gold = [r for _, r in read_records_csv(gold_records_csv)]
        diff = diff_extraction(gold, [])
        assert diff.total("wrong") == 0
        assert diff.total("spurious") == 0
        populated = 0
        from kleio.genealogy import DIFF_FIELDS, _field_text
        for record in gold:
            for field_name in DIFF_FIELDS:
                if field_name == "children":
                    populated += len(record.children)
                elif _field_text(record, field_name) is not None:
                    populated += 1
        assert diff.total("missing") == populated

    def test_fixture_error_profile(self, gold_records_csv, raw_extraction_table):
        gold = [r for _, r in read_records_csv(gold_records_csv)]
        got = parse_person_table(raw_extraction_table)
        diff = diff_extraction(gold, got)

        assert diff.total("wrong") == 1
        (wrong,) = [d for d in diff.discrepancies if d.kind == "wrong"]
        assert wrong.field == "date_of_birth"
        assert wrong.got == "15-03-1671"
        assert wrong.record_key == "Tomás de Ajuria y Urratia"

        assert diff.total("missing") == 19
        missing_by_field = {
            f: diff.counts[f].missing for f in diff.counts if diff.counts[f].missing
        }
        assert missing_by_field == {
            "full_name": 4,        # y Mendibil, y Gordobil, y Urratia, y Goiri
            "marriage_date": 2,    # 28-07-1664 twice
            "baptism_date": 1,     # 15-03-1671
            "father_name": 2,      # Martin, Domingo
            "mother_name": 2,      # Ana, Maria
            "children": 5,
            "spouse_name": 3,
        }
        assert diff.total("spurious") == 0
        assert diff.ambiguous == []
        assert diff.unmatched_gold == []
        assert diff.unmatched_got == []

    def test_spurious_records_counted(self, gold_records_csv):
        gold = [r for _, r in read_records_csv(gold_records_csv)]
        invented = PersonRecord(full_name="Persona Inventada",
                                place_of_birth="Ninguna", gender="Female")
        diff = diff_extraction(gold, gold + [invented])
        assert diff.counts["full_name"].spurious == 1
        assert diff.counts["place_of_birth"].spurious == 1
        assert diff.unmatched_got == ["Persona Inventada"]

    def test_invariant_without_invented_values(self, gold_records_csv):
        # correct + missing + wrong == gold populated count, per field,
        # whenever the extraction invents nothing.
        gold = [r for _, r in read_records_csv(gold_records_csv)]
        diff = diff_extraction(gold, [])
        from kleio.genealogy import DIFF_FIELDS, _field_text
        for field_name in DIFF_FIELDS:
            if field_name in ("children", "gender"):
                continue
            populated = sum(
                1 for r in gold if _field_text(r, field_name) is not None
            )
            counts = diff.counts[field_name]
            assert counts.correct + counts.missing + counts.wrong == populated

    def test_ambiguous_alignment_reported(self):
        gold = [PersonRecord(full_name="Juan Soler y Gil")]
        got = [PersonRecord(full_name="Juan Soler y Gil y Roca"),
               PersonRecord(full_name="Juan Soler")]
        diff = diff_extraction(gold, got)
        assert diff.ambiguous == ["Juan Soler y Gil"]


class TestExtractFromPages:
    def test_multi_page_scripted(self, family_page, raw_extraction_table):
        pages = [
            family_page,
            "Una página sin personas que enumerar en absoluto.",
            family_page.replace("AJURIA", "AJURIA SEGUNDA PARTE"),
        ]
        backend = MockChatBackend(script={
            "FAMILIA AJURIA": raw_extraction_table,
        })
        run = extract_from_pages(pages, ModelProfile(), chat_backend=backend)
        by_status = {r.page: r.status for r in run.reports}
        assert by_status[0] == "ok"
        assert by_status[1] == "error"  # mock abstains, no table in answer
        assert by_status[2] == "ok"
        pages_with_records = {page for page, _ in run.records}
        assert pages_with_records == {0, 2}
        assert any(s == (0, "Tomás de Ajuria", "Tomás de Ajuria y Urratia")
                   for s in run.suggestions)

    def test_empty_page_isolated(self, family_page, raw_extraction_table):
        backend = MockChatBackend(script={"FAMILIA AJURIA": raw_extraction_table})
        run = extract_from_pages(["   ", family_page], ModelProfile(),
                                 chat_backend=backend)
        assert run.reports[0].status == "error"
        assert run.reports[1].status == "ok"


class TestReconcileGenders:
    def test_fills_unknown_from_name_rules(self):
        from kleio.genealogy import reconcile_genders
        records = [PersonRecord(full_name="Isabel de Mendibíl")]
        reconciled, notes = reconcile_genders(records)
        assert reconciled[0].gender == "Female"
        assert notes == []

    def test_model_value_kept_on_disagreement(self, caplog):
        from kleio.genealogy import reconcile_genders
        records = [PersonRecord(full_name="Isabel de Mendibíl", gender="Male")]
        with caplog.at_level("WARNING"):
            reconciled, notes = reconcile_genders(records)
        assert reconciled[0].gender == "Male"  # model wins
        assert notes == [("Isabel de Mendibíl", "Male", "Female")]

    def test_agreement_passes_silently(self):
        from kleio.genealogy import reconcile_genders
        records = [PersonRecord(full_name="Domingo de Ajuría", gender="Male")]
        reconciled, notes = reconcile_genders(records)
        assert reconciled == records
        assert notes == []

    def test_unresolvable_name_stays_unknown(self):
        from kleio.genealogy import reconcile_genders
        records = [PersonRecord(full_name="X de Y")]
        reconciled, notes = reconcile_genders(records)
        assert reconciled[0].gender == "Unknown"
        assert notes == []
