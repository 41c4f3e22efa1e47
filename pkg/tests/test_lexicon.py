import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hanfix.errors import (
    LexiconFormatError,
    MalformedLine,
    MissingPinyin,
    WordTooLong,
)
from hanfix.lexicon import (
    Lexicon,
    WordEntry,
    build_lexicon,
    lexicon_fingerprint,
    lexicon_from_words,
)
from hanfix.pinyin import (
    FuzzyClassTable,
    PinyinTable,
    fuzzy_key,
    parse_syllable,
    syllables_equivalent,
)

PAIRS = [
    ("参", "can1"), ("参", "shen1"), ("加", "jia1"), ("家", "jia1"),
    ("禅", "chan2"), ("禅", "shan4"), ("会", "hui4"), ("会", "kuai4"),
    ("议", "yi4"), ("计", "ji4"), ("我", "wo3"), ("好", "hao3"),
    ("啊", "a1"), ("山", "shan1"), ("单", "dan1"),
]

WORDS = [
    ("参加", 80), ("禅家", 5), ("会议", 60), ("会计", 15),
    ("参", 10), ("家", 20), ("山单", 1),
]


@pytest.fixture(scope="module")
def ptable():
    return PinyinTable.from_pairs(PAIRS)


@pytest.fixture(scope="module")
def fuzzy():
    return FuzzyClassTable.default()


@pytest.fixture(scope="module")
def lex(ptable, fuzzy):
    return lexicon_from_words(WORDS, ptable, fuzzy)


def brute_force_spans(lex, sentence):
    # oracle: check every substring against every entry surface
    out = []
    for start in range(len(sentence)):
        for end in range(start, len(sentence)):
            for e in lex.entries:
                if e.surface == sentence[start:end + 1]:
                    out.append((start, end, e.word_id))
    return sorted(out)


class TestBuild:
    def test_ids_follow_input_order(self, lex):
        assert [e.surface for e in lex.entries] == [
            "参加", "禅家", "会议", "会计", "参", "家", "山单",
        ]
        assert lex.word_id("参加") == 0
        assert lex.surface(1) == "禅家"
        assert len(lex) == 7

    def test_primary_reading_is_first_table_reading(self, lex):
        e = lex.entries[lex.word_id("参加")]
        assert [str(s) for s in e.pinyin] == ["can1", "jia1"]
        # polyphone keeps every toneless reading for matching
        assert e.readings == (("can", "shen"), ("jia",))

    def test_duplicate_surface_merges_frequency(self, ptable, fuzzy):
        lex2 = lexicon_from_words(
            [("参加", 10), ("家", 1), ("参加", 5)], ptable, fuzzy
        )
        assert len(lex2) == 2
        assert lex2.entries[0].frequency == 15

    def test_missing_pinyin(self, ptable, fuzzy):
        with pytest.raises(MissingPinyin):
            lexicon_from_words([("参外", 1)], ptable, fuzzy)

    def test_word_too_long(self, ptable, fuzzy):
        with pytest.raises(WordTooLong):
            lexicon_from_words([("参加参加参", 1)], ptable, fuzzy)
        with pytest.raises(WordTooLong):
            WordEntry(0, "", (), 1)

    def test_from_file(self, tmp_path, ptable, fuzzy):
        p = tmp_path / "words.tsv"
        p.write_text("参加\t80\n# comment\n家\n", encoding="utf-8")
        lex2 = build_lexicon(p, ptable, fuzzy)
        assert len(lex2) == 2
        assert lex2.entries[1].frequency == 1  # default when column omitted

    @pytest.mark.parametrize("line", ["参加\tx", "参加\t1\t2", "参加\t-3"])
    def test_from_file_malformed(self, tmp_path, ptable, fuzzy, line):
        p = tmp_path / "words.tsv"
        p.write_text(line + "\n", encoding="utf-8")
        with pytest.raises(MalformedLine):
            build_lexicon(p, ptable, fuzzy)

    def test_from_file_missing_pinyin_names_line(self, tmp_path, ptable, fuzzy):
        p = tmp_path / "words.tsv"
        p.write_text("参加\t1\n外\t1\n", encoding="utf-8")
        with pytest.raises(MissingPinyin) as ei:
            build_lexicon(p, ptable, fuzzy)
        assert ":2" in str(ei.value)


class TestTrie:
    def test_match_example(self, lex):
        got = lex.trie_match_all("我参加会议")
        assert got == brute_force_spans(lex, "我参加会议")
        surfaces = {(s, e, lex.surface(w)) for s, e, w in got}
        assert (1, 2, "参加") in surfaces
        assert (3, 4, "会议") in surfaces
        assert (1, 1, "参") in surfaces

    def test_no_match(self, lex):
        assert lex.trie_match_all("好好好") == []
        assert lex.trie_match_all("") == []

    def test_overlapping_matches(self, lex):
        # 会 belongs to both 会议 and 会计 contexts; check a string where
        # two 2-char words share a char
        got = lex.trie_match_all("会议会计")
        assert got == brute_force_spans(lex, "会议会计")

    @given(st.lists(st.sampled_from("参加禅家会议计我好山单"),
                    min_size=0, max_size=12))
    @settings(max_examples=200)
    def test_matches_brute_force(self, lex, chars):
        s = "".join(chars)
        assert lex.trie_match_all(s) == brute_force_spans(lex, s)


class TestPinyin2Gram:
    def test_exact_pair(self, lex, fuzzy):
        a, b = parse_syllable("can1"), parse_syllable("jia1")
        ids = lex.pinyin_2gram_lookup(a, b, fuzzy)
        assert lex.word_id("参加") in ids
        assert lex.word_id("禅家") in ids  # chan ~ can under z/zh c/ch s/sh

    def test_frequency_ranking(self, lex):
        # 参加 (freq 80) must precede 禅家 (freq 5) in their shared bucket
        key = ("can", "jia")
        ids = lex.pinyin2gram_index[key]
        assert list(ids).index(lex.word_id("参加")) < list(ids).index(
            lex.word_id("禅家")
        )

    def test_polyphone_cross_product(self, lex, fuzzy):
        # 会计 is kuai4 ji4, but 会 also reads hui4: both keys must hit
        ids_hui = lex.pinyin_2gram_lookup(
            parse_syllable("hui4"), parse_syllable("ji4"), fuzzy
        )
        ids_kuai = lex.pinyin_2gram_lookup(
            parse_syllable("kuai4"), parse_syllable("ji4"), fuzzy
        )
        assert lex.word_id("会计") in ids_hui
        assert lex.word_id("会计") in ids_kuai
        # 参 polyphone: shen reading must find 参加 too
        ids_shen = lex.pinyin_2gram_lookup(
            parse_syllable("shen2"), parse_syllable("jia3"), fuzzy
        )
        assert lex.word_id("参加") in ids_shen

    def test_only_two_char_words_indexed(self, lex):
        for ids in lex.pinyin2gram_index.values():
            for wid in ids:
                assert len(lex.surface(wid)) == 2

    def test_miss_returns_empty(self, lex, fuzzy):
        assert lex.pinyin_2gram_lookup(
            parse_syllable("wo3"), parse_syllable("wo3"), fuzzy
        ) == []

    @given(
        st.sampled_from(["can", "chan", "shan", "shen", "jia", "hui", "kuai",
                         "ji", "yi", "wo", "dan", "a"]),
        st.sampled_from(["can", "chan", "shan", "shen", "jia", "hui", "kuai",
                         "ji", "yi", "wo", "dan", "a"]),
    )
    @settings(max_examples=150)
    def test_lookup_matches_equivalence_filter(self, lex, fuzzy, sa, sb):
        # oracle: filter 2-char entries by syllables_equivalent on any
        # reading combination, then rank like the index does
        a, b = parse_syllable(sa), parse_syllable(sb)
        expect = set()
        for e in lex.entries:
            if len(e.surface) != 2:
                continue
            for ra in e.readings[0]:
                for rb in e.readings[1]:
                    if syllables_equivalent(a, parse_syllable(ra), fuzzy) and \
                       syllables_equivalent(b, parse_syllable(rb), fuzzy):
                        expect.add(e.word_id)
        got = lex.pinyin_2gram_lookup(a, b, fuzzy)
        assert set(got) == expect
        ranked = sorted(got, key=lambda w: (-lex.entries[w].frequency, w))
        assert got == ranked


class TestSerialization:
    def test_round_trip(self, lex, tmp_path):
        p = tmp_path / "lex.json"
        lex.save(p)
        lex2 = Lexicon.load(p)
        assert len(lex2) == len(lex)
        assert lex2.to_json() == lex.to_json()
        assert lexicon_fingerprint(lex2) == lexicon_fingerprint(lex)
        assert lex2.trie_match_all("我参加会议") == lex.trie_match_all("我参加会议")
        assert lex2.pinyin2gram_index == lex.pinyin2gram_index

    def test_deterministic_bytes(self, ptable, fuzzy):
        a = lexicon_from_words(WORDS, ptable, fuzzy)
        b = lexicon_from_words(list(WORDS), ptable, fuzzy)
        assert a.to_json() == b.to_json()

    def test_rejects_garbage(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("not json at all", encoding="utf-8")
        with pytest.raises(LexiconFormatError):
            Lexicon.load(p)

    def test_rejects_wrong_magic(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"magic": "other", "version": 1}', encoding="utf-8")
        with pytest.raises(LexiconFormatError):
            Lexicon.load(p)

    def test_rejects_wrong_version(self, lex, tmp_path):
        import json

        payload = json.loads(lex.to_json())
        payload["version"] = 99
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")
        with pytest.raises(LexiconFormatError):
            Lexicon.load(p)
