"""Cardinal number words for the five languages.

Covers |n| <= 999,999, which is ample for lyric text. Japanese output is
kana (not kanji) so the mora counter can consume it directly.
"""

from __future__ import annotations

from ..errors import NumberRangeError
from ..languages import Language

MAX_SUPPORTED = 999_999

_EN_ONES = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
]
_EN_TENS = ["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy",
            "eighty", "ninety"]

_ES_ONES = [
    "cero", "uno", "dos", "tres", "cuatro", "cinco", "seis", "siete", "ocho",
    "nueve", "diez", "once", "doce", "trece", "catorce", "quince",
    "dieciséis", "diecisiete", "dieciocho", "diecinueve", "veinte",
    "veintiuno", "veintidós", "veintitrés", "veinticuatro", "veinticinco",
    "veintiséis", "veintisiete", "veintiocho", "veintinueve",
]
_ES_TENS = ["", "", "", "treinta", "cuarenta", "cincuenta", "sesenta",
            "setenta", "ochenta", "noventa"]
_ES_HUNDREDS = ["", "ciento", "doscientos", "trescientos", "cuatrocientos",
                "quinientos", "seiscientos", "setecientos", "ochocientos",
                "novecientos"]

_FR_ONES = [
    "zéro", "un", "deux", "trois", "quatre", "cinq", "six", "sept", "huit",
    "neuf", "dix", "onze", "douze", "treize", "quatorze", "quinze", "seize",
    "dix-sept", "dix-huit", "dix-neuf",
]
_FR_TENS = ["", "", "vingt", "trente", "quarante", "cinquante", "soixante"]

_KO_DIGITS = ["", "일", "이", "삼", "사", "오", "육", "칠", "팔", "구"]

_JA_DIGITS = ["", "いち", "に", "さん", "よん", "ご", "ろく", "なな", "はち", "きゅう"]
_JA_HUNDREDS = {1: "ひゃく", 3: "さんびゃく", 6: "ろっぴゃく", 8: "はっぴゃく"}
_JA_THOUSANDS = {1: "せん", 3: "さんぜん", 8: "はっせん"}

_MINUS = {
    Language.EN: "minus ",
    Language.ES: "menos ",
    Language.FR: "moins ",
    Language.KO: "마이너스 ",
    Language.JA: "マイナス",
}


def expand_number(lang: Language, n: int) -> str:
    """Spell out integer ``n`` as cardinal words in ``lang``."""
    if abs(n) > MAX_SUPPORTED:
        raise NumberRangeError(f"|{n}| exceeds supported range {MAX_SUPPORTED}")
    if n < 0:
        return _MINUS[lang] + expand_number(lang, -n)
    builder = _BUILDERS[lang]
    return builder(n)


def _english(n: int) -> str:
    if n < 20:
        return _EN_ONES[n]
    if n < 100:
        tens, unit = divmod(n, 10)
        word = _EN_TENS[tens]
        return f"{word}-{_EN_ONES[unit]}" if unit else word
    if n < 1000:
        hundreds, rest = divmod(n, 100)
        word = f"{_EN_ONES[hundreds]} hundred"
        return f"{word} {_english(rest)}" if rest else word
    thousands, rest = divmod(n, 1000)
    word = f"{_english(thousands)} thousand"
    return f"{word} {_english(rest)}" if rest else word


def _spanish(n: int) -> str:
    if n < 30:
        return _ES_ONES[n]
    if n < 100:
        tens, unit = divmod(n, 10)
        word = _ES_TENS[tens]
        return f"{word} y {_ES_ONES[unit]}" if unit else word
    if n == 100:
        return "cien"
    if n < 1000:
        hundreds, rest = divmod(n, 100)
        word = _ES_HUNDREDS[hundreds]
        return f"{word} {_spanish(rest)}" if rest else word
    thousands, rest = divmod(n, 1000)
    word = "mil" if thousands == 1 else f"{_spanish(thousands)} mil"
    return f"{word} {_spanish(rest)}" if rest else word


def _french(n: int, *, multiplier: bool = False) -> str:
    # multiplier=True while spelling the thousands factor, where vingt/cent
    # never take a plural "s" (quatre-vingt-mille, deux-cent-mille).
    if n < 20:
        return _FR_ONES[n]
    if n < 70:
        tens, unit = divmod(n, 10)
        if unit == 1:
            return f"{_FR_TENS[tens]}-et-un"
        word = _FR_TENS[tens]
        return f"{word}-{_FR_ONES[unit]}" if unit else word
    if n < 80:
        if n == 71:
            return "soixante-et-onze"
        return f"soixante-{_FR_ONES[n - 60]}"
    if n < 100:
        if n == 80:
            return "quatre-vingt" if multiplier else "quatre-vingts"
        return f"quatre-vingt-{_FR_ONES[n - 80]}"
    if n < 1000:
        hundreds, rest = divmod(n, 100)
        head = "cent" if hundreds == 1 else f"{_FR_ONES[hundreds]}-cent"
        if rest:
            return f"{head}-{_french(rest, multiplier=multiplier)}"
        if hundreds > 1 and not multiplier:
            return head + "s"
        return head
    thousands, rest = divmod(n, 1000)
    head = "mille" if thousands == 1 else f"{_french(thousands, multiplier=True)}-mille"
    return f"{head}-{_french(rest)}" if rest else head


def _korean(n: int) -> str:
    if n == 0:
        return "영"
    parts = []
    man, rest = divmod(n, 10_000)
    if man:
        parts.append(("" if man == 1 else _korean_small(man)) + "만")
    if rest:
        parts.append(_korean_small(rest))
    return "".join(parts)


def _korean_small(n: int) -> str:
    # 1..9999 in Sino-Korean; the "일" multiplier is omitted (백십, not 일백일십)
    parts = []
    for value, unit in ((1000, "천"), (100, "백"), (10, "십")):
        digit, n = divmod(n, value)
        if digit:
            parts.append(("" if digit == 1 else _KO_DIGITS[digit]) + unit)
    if n:
        parts.append(_KO_DIGITS[n])
    return "".join(parts)


def _japanese(n: int) -> str:
    if n == 0:
        return "ゼロ"
    parts = []
    man, rest = divmod(n, 10_000)
    if man:
        parts.append(_japanese_small(man) + "まん")
    if rest:
        parts.append(_japanese_small(rest))
    return "".join(parts)


def _japanese_small(n: int) -> str:
    parts = []
    thousands, n = divmod(n, 1000)
    if thousands:
        parts.append(_JA_THOUSANDS.get(thousands, _JA_DIGITS[thousands] + "せん"))
    hundreds, n = divmod(n, 100)
    if hundreds:
        parts.append(_JA_HUNDREDS.get(hundreds, _JA_DIGITS[hundreds] + "ひゃく"))
    tens, n = divmod(n, 10)
    if tens:
        parts.append(("" if tens == 1 else _JA_DIGITS[tens]) + "じゅう")
    if n:
        parts.append(_JA_DIGITS[n])
    return "".join(parts)


_BUILDERS = {
    Language.EN: _english,
    Language.ES: _spanish,
    Language.FR: _french,
    Language.KO: _korean,
    Language.JA: _japanese,
}
