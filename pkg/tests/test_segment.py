import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from hatelab.encoding import default_markers, normalize
from hatelab.errors import NotNormalized
from hatelab.segment import (
    SegmentDictionary,
    SyllableKind,
    burmese_ratio,
    remove_stopwords,
    segment_syllables,
    segment_words,
    strip_emoji,
)

KA, KHA, GA = "က", "ခ", "ဂ"


class TestSegmentSyllables:
    def test_single_consonant_vowel(self):
        sylls = segment_syllables("မာ")  # မာ
        assert len(sylls) == 1
        assert sylls[0].kind is SyllableKind.MYANMAR

    def test_asat_closes_previous_syllable(self):
        sylls = segment_syllables("မြန်မာ")  # မြန်မာ
        assert [s.text for s in sylls] == ["မြန်", "မာ"]

    def test_latin_is_one_other_syllable(self):
        sylls = segment_syllables("ok")
        assert len(sylls) == 1
        assert sylls[0].kind is SyllableKind.OTHER
        assert sum(1 for s in sylls if s.kind is SyllableKind.MYANMAR) == 0

    def test_virama_stacking_does_not_split(self):
        sylls = segment_syllables("သမ္မတ")  # သမ္မတ
        assert [s.text for s in sylls] == ["သ", "မ္မ", "တ"]

    def test_kinzi_stays_in_one_syllable(self):
        sylls = segment_syllables("အင်္ဂလိပ်")
        assert [s.text for s in sylls] == [
            "အင်္ဂ", "လိပ်"]

    def test_rejects_zawgyi_markers(self):
        with pytest.raises(NotNormalized):
            segment_syllables("ေမ")

    def test_adding_syllable_initial_consonant_adds_one(self):
        base = "မာ"
        n0 = len(segment_syllables(base))
        n1 = len(segment_syllables(base + KA))
        assert n1 == n0 + 1

    @settings(max_examples=250, deadline=None)
    @given(st.text(alphabet=st.one_of(
        st.characters(min_codepoint=0x1000, max_codepoint=0x109F),
        st.characters(min_codepoint=0x20, max_codepoint=0x7E),
    ), max_size=30))
    def test_reconstruction_exact(self, raw):
        text, _ = normalize(raw)
        assume(default_markers().count(text)[0] == 0)  # convertible input only
        sylls = segment_syllables(text)
        assert "".join(s.text for s in sylls) == text
        for s in sylls:
            assert s.text == text[s.start:s.end]
            if s.kind is SyllableKind.MYANMAR:
                assert all(0x1000 <= ord(c) <= 0x109F for c in s.text)


class TestSegmentWords:
    def test_longest_match_then_oov(self):
        sylls = segment_syllables(KA + "ာ" + KHA + "ာ" + GA + "ာ")
        d = SegmentDictionary([KA + "ာ" + KHA + "ာ"])
        tokens = segment_words(sylls, d)
        assert [t.in_dictionary for t in tokens] == [True, False]
        assert tokens[0].syllable_span == (0, 1)
        assert tokens[1].syllable_span == (2, 2)

    def test_longest_match_wins_over_prefix(self):
        text = KA + KHA + GA
        sylls = segment_syllables(text)
        d = SegmentDictionary([KA, text])
        tokens = segment_words(sylls, d)
        assert len(tokens) == 1
        assert tokens[0].text == text
        assert tokens[0].in_dictionary

    def test_empty_input(self):
        assert segment_words([], SegmentDictionary([KA])) == []

    def test_other_syllables_single_tokens(self):
        sylls = segment_syllables(KA + " ok " + KHA)
        tokens = segment_words(sylls, SegmentDictionary([]))
        assert [t.text for t in tokens] == [KA, " ok ", KHA]

    def test_oov_tokens_span_one_syllable(self):
        sylls = segment_syllables(KA + KHA + GA)
        tokens = segment_words(sylls, SegmentDictionary([]))
        assert all(t.syllable_span[0] == t.syllable_span[1] for t in tokens)
        assert not any(t.in_dictionary for t in tokens)

    def test_tokens_reconstruct_input(self):
        text = "မြန်မာ ok ကုလား"
        sylls = segment_syllables(text)
        d = SegmentDictionary(["မြန်မာ"])
        tokens = segment_words(sylls, d)
        assert "".join(t.text for t in tokens) == text


class TestRemoveStopwords:
    def test_filters_exact_text(self):
        sylls = segment_syllables(KA + KHA + GA)
        tokens = segment_words(sylls, SegmentDictionary([]))
        out = remove_stopwords(tokens, {KHA})
        assert [t.text for t in out] == [KA, GA]

    def test_empty_stoplist_is_identity(self):
        sylls = segment_syllables(KA + KHA)
        tokens = segment_words(sylls, SegmentDictionary([]))
        assert remove_stopwords(tokens, set()) == tokens

    def test_all_stopwords_gives_empty(self):
        sylls = segment_syllables(KA + KHA)
        tokens = segment_words(sylls, SegmentDictionary([]))
        assert remove_stopwords(tokens, {KA, KHA}) == []


class TestBurmeseRatio:
    def test_pure_burmese(self):
        assert burmese_ratio("မာ") == 1.0

    def test_half_and_half(self):
        assert burmese_ratio("မာab") == 0.5

    def test_empty_is_zero(self):
        assert burmese_ratio("") == 0.0
        assert burmese_ratio("   \n") == 0.0

    def test_whitespace_not_counted(self):
        assert burmese_ratio("မ ာ") == 1.0


class TestStripEmoji:
    def test_removes_emoji(self):
        assert strip_emoji("hi😀") == "hi"

    def test_burmese_untouched(self):
        text = "မြန်မာ"
        assert strip_emoji(text) == text

    def test_emoji_only_becomes_empty(self):
        assert strip_emoji("😀🔥🙏") == ""

    def test_zwj_and_variation_selectors_removed(self):
        assert strip_emoji("a‍️b") == "ab"
