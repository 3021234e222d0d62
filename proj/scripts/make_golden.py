#!/usr/bin/env python3
"""Regenerates the frozen tokenizer fixtures under data/fixtures/.

Runs the reference tokenizer (tiktoken, pointed at the bundled
cl100k_base.tiktoken file so no download happens) over:

  * the 50-string fixture corpus (tokenizer_golden.json),
  * a seeded 2000-string random corpus (tokenizer_golden_random.json),
  * the before/after pairs used by the heuristic tests (heuristic_golden.json).

It also stems a seeded word sample with NLTK's Porter implementation in its
original-algorithm mode (porter_golden.json) and writes the spell-repair word
list (data/dict/words.txt, the public-domain web2 list).

Requires `pip install tiktoken nltk english-words`. The outputs are committed;
the C++ tests only read them.
"""

import json
import random
from pathlib import Path

import tiktoken
from english_words import get_english_words_set
from nltk.stem.porter import PorterStemmer
from tiktoken.load import load_tiktoken_bpe

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

CONFIG = json.loads((DATA / "vocab" / "cl100k_base.json").read_text())
ENC = tiktoken.Encoding(
    "cl100k_base",
    pat_str=CONFIG["pattern"],
    mergeable_ranks=load_tiktoken_bpe(str(DATA / "vocab" / CONFIG["ranks"])),
    special_tokens={},
)

FIXTURES = [
    "",
    "a",
    "Hello world",
    "Hello, world!",
    "The quick brown fox jumps over the lazy dog.",
    "I'm sure they'll say it's fine, but we've seen what'd happen.",
    "DON'T SHOUT'S AND WE'LL LISTEN",
    "The U.S.A. and the U.K. signed the treaty in 1998.",
    "Call 555-0123 or 1234567890 before 12:30pm.",
    "3.14159265358979323846",
    "    leading spaces",
    "trailing spaces    ",
    "multiple   inner    spaces",
    "tab\tseparated\tvalues",
    "line one\nline two\n\nline four",
    "windows\r\nline endings\r\n",
    "   \n\n   \n",
    "naïve café résumé façade",
    "Ünïcödé über straße",
    "日本語のテキストです。",
    "中文文本处理测试",
    "한국어 텍스트",
    "Привет, мир! Как дела?",
    "مرحبا بالعالم",
    "emoji 😀🎉👍🏽 test",
    "family 👨‍👩‍👧‍👦 emoji",
    "math: ∑ x² ≤ ∞ and α + β = γ",
    "def f(x):\n    return x ** 2\n",
    "int main() { return 0; }",
    "{\"key\": [1, 2, 3], \"nested\": {\"a\": null}}",
    "https://example.com/path?query=1&other=two#frag",
    "user@example.org",
    "(parenthetical remarks) and [brackets] and {braces}",
    "well-known state-of-the-art non-trivial",
    "multi-tasking pre-existing anti-inflammatory",
    "e.g. i.e. etc. vs. Mr. Dr.",
    "!!!???...,,,;;;:::",
    "----====____",
    "a b c d e f g h i j k l m n o p q r s t u v w x y z",
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ",
    "The year 2023 had 365 days and 8760 hours.",
    "1,000,000 and 1.000.000 and 1 000 000",
    "Running runners ran; they had been running runs.",
    "Internationalization localization globalization",
    "The mitochondria is the powerhouse of the cell.",
    "It's 5 o'clock somewhere, isn't it?",
    " non-breaking spaces em-space",
    "zero​width​joiner",
    "vertical\u000btab and next\u0085line",
    "Summarize the following section in five sentences: revenue grew 12% year over year.",
]

HEURISTIC_PAIRS = [
    ["U.S.A.", "USA"],
    ["the cat sat on the mat", "cat sat mat"],
    ["The U.S.A. is large.", "The USA is large."],
    ["He visited (briefly) the museum.", "He visited briefly the museum."],
]


def random_corpus(seed: int, count: int) -> list[str]:
    rng = random.Random(seed)
    alphabets = [
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ",
        "0123456789",
        " \t\n\r ",
        ".,;:!?'\"()[]{}-_/\\@#$%^&*+=<>|~`",
        "éèêëàâäôöûüçñßøåæœ",
        "日本語中文한국어",
        "😀🎉👍🏽🚀",
        "αβγδεζηθλμπσφω",
    ]
    words = ["the", "of", "and", "model", "token", "budget", "cost", "latency",
             "running", "international", "U.S.A.", "don't", "we'll", "1234", "3.5"]
    out = []
    for _ in range(count):
        parts = []
        for _ in range(rng.randint(0, 12)):
            if rng.random() < 0.4:
                parts.append(rng.choice(words))
            else:
                alpha = rng.choice(alphabets)
                parts.append("".join(rng.choice(alpha) for _ in range(rng.randint(1, 6))))
            parts.append(rng.choice(["", " ", " ", "  ", "\n", ", "]))
        out.append("".join(parts))
    return out


def golden(strings: list[str]) -> list[dict]:
    return [{"text": s, "tokens": ENC.encode(s), "count": len(ENC.encode(s))} for s in strings]


def porter_cases(words: list[str], seed: int, count: int) -> list[dict]:
    rng = random.Random(seed)
    extra = ["caresses", "ponies", "ties", "caress", "cats", "feed", "agreed", "plastered", "bled",
             "motoring", "sing", "conflated", "troubled", "sized", "hopping", "tanned", "falling",
             "hissing", "fizzed", "failing", "filing", "happy", "sky", "relational", "conditional",
             "rational", "valenci", "hesitanci", "digitizer", "conformabli", "radicalli", "differentli",
             "vileli", "analogousli", "vietnamization", "predication", "operator", "feudalism",
             "decisiveness", "hopefulness", "callousness", "formaliti", "sensitiviti", "sensibiliti",
             "triplicate", "formative", "formalize", "electriciti", "electrical", "hopeful", "goodness",
             "revival", "allowance", "inference", "airliner", "gyroscopic", "adjustable", "defensible",
             "irritant", "replacement", "adjustment", "dependent", "adoption", "homologou", "communism",
             "activate", "angulariti", "homologous", "effective", "bowdlerize", "probate", "rate",
             "cease", "controll", "roll", "generalizations", "oscillators", "a", "is", "as", "by",
             "yyyy", "syzygy", "toy", "enjoy", "studies", "running", "realized", "organization"]
    sample = extra + rng.sample(words, count)
    stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
    return [{"word": w, "stem": stemmer.stem(w)} for w in sample]


RATIO_SOURCE = (
    "The quarterly review found that the regional offices had, in almost every case, exceeded the targets "
    "that were set at the start of the year, although several of the smaller branches reported that the new "
    "scheduling software had introduced delays which were only partly resolved by the later update. Staff "
    "surveys showed broad satisfaction with the revised travel policy, and the committee recommended that the "
    "pilot programme for remote onboarding be extended to all departments before the end of the next fiscal "
    "year, subject to a further review of its costs and of the feedback collected from new employees.")


def ratio_pair(complex_tokens: int, simple_tokens: int) -> tuple[str, str]:
    """Word prefixes of RATIO_SOURCE with exactly the requested token counts."""
    words = RATIO_SOURCE.split(" ")

    def prefix(n: int) -> str:
        for k in range(1, len(words) + 1):
            text = " ".join(words[:k])
            if len(ENC.encode(text)) == n:
                return text
        raise ValueError(f"no word prefix with {n} tokens")

    return prefix(complex_tokens), prefix(simple_tokens)


def main() -> None:
    fixtures = DATA / "fixtures"
    fixtures.mkdir(parents=True, exist_ok=True)
    assert len(FIXTURES) == 50
    (fixtures / "tokenizer_golden.json").write_text(
        json.dumps({"vocabulary": "cl100k_base", "cases": golden(FIXTURES)}, ensure_ascii=False, indent=1))
    (fixtures / "tokenizer_golden_random.json").write_text(
        json.dumps({"vocabulary": "cl100k_base", "seed": 20231, "cases": golden(random_corpus(20231, 2000))},
                   ensure_ascii=False))
    web2 = sorted(get_english_words_set(["web2"], lower=True, alpha=True))
    (fixtures / "porter_golden.json").write_text(
        json.dumps({"mode": "original", "seed": 1980, "cases": porter_cases(web2, 1980, 5000)}, indent=0))
    dict_dir = DATA / "dict"
    dict_dir.mkdir(parents=True, exist_ok=True)
    (dict_dir / "words.txt").write_text("\n".join(web2) + "\n")
    pairs = [{"before": b, "after": a, "before_count": len(ENC.encode(b)), "after_count": len(ENC.encode(a))}
             for b, a in HEURISTIC_PAIRS]
    complex_text, simple_text = ratio_pair(100, 53)
    ratio = {"complex": complex_text, "simple": simple_text,
             "complex_count": len(ENC.encode(complex_text)), "simple_count": len(ENC.encode(simple_text))}
    (fixtures / "heuristic_golden.json").write_text(
        json.dumps({"pairs": pairs, "ratio_pair": ratio}, ensure_ascii=False, indent=1))


if __name__ == "__main__":
    main()
