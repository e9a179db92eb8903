"""Extract a person table from a genealogical page and diff it against
a corrected version.

A scripted mock stands in for the chat model so the page-wise pipeline
(prompt -> table -> records -> compound-surname suggestions -> diff) runs
offline:

    python demos/04_genealogy_extraction.py
"""

from kleio import ModelProfile, MockChatBackend, diff_extraction, extract_from_pages
from kleio.genealogy import parse_person_table

PAGE = """LINAJE DE OYARZUN

Pedro de Oyarzun, natural de Rentería, casó el 03-05-1712 con Catalina
Ibarra y Lecuona, de cuya unión nació Miguel de Oyarzun y Ibarra,
bautizado el 19-11-1713, que siguió el oficio de escribano.
"""

# What a model typically returns: one truncated surname and one date
# copied into the wrong column.
MODEL_RESPONSE = """\
| Full Name | Date of Birth | Baptism Date | Marriage Date | Spouse's Full Name | Occupation | Gender |
|---|---|---|---|---|---|---|
| Pedro de Oyarzun | Unknown | Unknown | 03-05-1712 | Catalina Ibarra | Unknown | Male |
| Catalina Ibarra | Unknown | Unknown | 03-05-1712 | Pedro de Oyarzun | Unknown | Female |
| Miguel de Oyarzun | 19-11-1713 | Unknown | Unknown | Unknown | escribano | Male |
"""

GOLD = """\
| Full Name | Date of Birth | Baptism Date | Marriage Date | Spouse's Full Name | Occupation | Gender |
|---|---|---|---|---|---|---|
| Pedro de Oyarzun | Unknown | Unknown | 03-05-1712 | Catalina Ibarra y Lecuona | Unknown | Male |
| Catalina Ibarra y Lecuona | Unknown | Unknown | 03-05-1712 | Pedro de Oyarzun | Unknown | Female |
| Miguel de Oyarzun y Ibarra | Unknown | 19-11-1713 | Unknown | Unknown | escribano | Male |
"""

backend = MockChatBackend(script={"LINAJE DE OYARZUN": MODEL_RESPONSE})
run = extract_from_pages([PAGE], ModelProfile(), chat_backend=backend)

print(f"extracted {len(run.records)} records from {len(run.reports)} page(s)")
for page, name, suggestion in run.suggestions:
    print(f"  surname repair suggestion (page {page}): {name} -> {suggestion}")

gold = parse_person_table(GOLD)
diff = diff_extraction(gold, [record for _, record in run.records])
print(f"\ndiff vs gold: {diff.total('correct')} correct, "
      f"{diff.total('missing')} missing, {diff.total('wrong')} wrong, "
      f"{diff.total('spurious')} spurious")
for disc in diff.discrepancies:
    print(f"  {disc.kind}: {disc.record_key} / {disc.field}: "
          f"expected {disc.expected!r}, got {disc.got!r}")
