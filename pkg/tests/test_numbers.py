import pytest

from mavl.errors import NumberRangeError
from mavl.languages import Language
from mavl.syllables import expand_number


@pytest.mark.parametrize("n,want", [
    (0, "zero"),
    (7, "seven"),
    (13, "thirteen"),
    (21, "twenty-one"),
    (40, "forty"),
    (100, "one hundred"),
    (101, "one hundred one"),
    (999, "nine hundred ninety-nine"),
    (1000, "one thousand"),
    (123456, "one hundred twenty-three thousand four hundred fifty-six"),
    (-5, "minus five"),
])
def test_english(n, want):
    assert expand_number(Language.EN, n) == want


@pytest.mark.parametrize("n,want", [
    (0, "cero"),
    (15, "quince"),
    (16, "dieciséis"),
    (21, "veintiuno"),
    (31, "treinta y uno"),
    (100, "cien"),
    (101, "ciento uno"),
    (200, "doscientos"),
    (500, "quinientos"),
    (700, "setecientos"),
    (900, "novecientos"),
    (1000, "mil"),
    (2024, "dos mil veinticuatro"),
    (100000, "cien mil"),
    (-2, "menos dos"),
])
def test_spanish(n, want):
    assert expand_number(Language.ES, n) == want


@pytest.mark.parametrize("n,want", [
    (0, "zéro"),
    (17, "dix-sept"),
    (21, "vingt-et-un"),
    (70, "soixante-dix"),
    (71, "soixante-et-onze"),
    (80, "quatre-vingts"),
    (81, "quatre-vingt-un"),
    (90, "quatre-vingt-dix"),
    (91, "quatre-vingt-onze"),
    (100, "cent"),
    (101, "cent-un"),
    (200, "deux-cents"),
    (201, "deux-cent-un"),
    (1000, "mille"),
    (80000, "quatre-vingt-mille"),
    (200000, "deux-cent-mille"),
    (-2, "moins deux"),
])
def test_french(n, want):
    assert expand_number(Language.FR, n) == want


@pytest.mark.parametrize("n,want", [
    (0, "영"),
    (1, "일"),
    (3, "삼"),
    (10, "십"),
    (11, "십일"),
    (60, "육십"),
    (110, "백십"),
    (10000, "만"),
    (123456, "십이만삼천사백오십육"),
    (-2, "마이너스 이"),
])
def test_korean(n, want):
    assert expand_number(Language.KO, n) == want


@pytest.mark.parametrize("n,want", [
    (0, "ゼロ"),
    (3, "さん"),
    (10, "じゅう"),
    (11, "じゅういち"),
    (300, "さんびゃく"),
    (600, "ろっぴゃく"),
    (800, "はっぴゃく"),
    (3000, "さんぜん"),
    (8000, "はっせん"),
    (10000, "いちまん"),
    (123456, "じゅうにまんさんぜんよんひゃくごじゅうろく"),
    (-2, "マイナスに"),
])
def test_japanese(n, want):
    assert expand_number(Language.JA, n) == want


@pytest.mark.parametrize("n", [1_000_000, -1_000_000, 5_000_000])
def test_out_of_range(n):
    with pytest.raises(NumberRangeError):
        expand_number(Language.EN, n)


def test_range_boundary_ok():
    for lang in Language:
        assert expand_number(lang, 999_999)
        assert expand_number(lang, -999_999)
