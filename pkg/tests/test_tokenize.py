"""Preprocessing documents into token streams."""

from wexfab.wrappers import preprocess, split_words
from wexfab.wrappers.tokenize import Token, tag_close, tag_open, word


def kinds(tokens):
    return [(t.kind, t.text) for t in tokens]


class TestPreprocess:
    def test_direct_tokenization(self):
        assert kinds(preprocess("<b>VLDB</b> 2001")) == [
            ("open", "b"), ("word", "VLDB"), ("close", "b"), ("word", "2001"),
        ]

    def test_comment_removed_entity_decoded_punctuation_split(self):
        # oracle: hand-tokenized under the stated rule (alnum runs are words,
        # any other non-space character stands alone)
        assert preprocess("<!-- x --><p>a&amp;b</p>") == [
            tag_open("p"), word("a"), word("&"), word("b"), tag_close("p"),
        ]

    def test_empty_input(self):
        assert preprocess("") == []

    def test_script_and_style_content_removed(self):
        tokens = preprocess("<script>var x = '<li>';</script><style>p{}</style><p>kept</p>")
        assert kinds(tokens) == [("open", "p"), ("word", "kept"), ("close", "p")]

    def test_tag_names_lowercased_attributes_dropped(self):
        tokens = preprocess('<DIV CLASS="big">x</DIV>')
        assert kinds(tokens) == [("open", "div"), ("word", "x"), ("close", "div")]

    def test_self_closing_tag_opens_and_closes(self):
        assert kinds(preprocess("a<br/>b")) == [
            ("word", "a"), ("open", "br"), ("close", "br"), ("word", "b"),
        ]

    def test_positions_are_sequence_indices(self):
        tokens = preprocess("<p>x y</p>")
        assert [t.position for t in tokens] == list(range(len(tokens)))

    def test_malformed_markup_is_tokenized_not_rejected(self):
        tokens = preprocess("<p>unclosed <b>bold")
        assert ("word", "bold") in kinds(tokens)

    def test_position_ignored_by_equality(self):
        assert Token("word", "x", 3) == Token("word", "x", 7)


class TestSplitWords:
    def test_punctuation_becomes_single_tokens(self):
        assert split_words("Roma, Italy") == ["Roma", ",", "Italy"]

    def test_apostrophes_split(self):
        assert split_words("Xi'an") == ["Xi", "'", "an"]

    def test_numbers_stay_whole(self):
        assert split_words("VLDB 2001: x") == ["VLDB", "2001", ":", "x"]

    def test_unicode_letters_are_word_characters(self):
        assert split_words("Ciudad Juárez") == ["Ciudad", "Juárez"]
