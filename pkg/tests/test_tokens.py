import random

import pytest

from gramdec.earley import init_state
from gramdec.errors import DisallowedTokenError, VocabularyError
from gramdec.grammar import parse_grammar, reduce
from gramdec.tokens import (
    Vocabulary,
    advance_token,
    allowed_tokens,
    build_trie,
    dense_mask,
    dump_vocab_jsonl,
    load_vocab_jsonl,
)

from helpers import make_vocab, random_grammars, random_vocab

ANBN = reduce(parse_grammar('@start S\nS -> "a" S "b"\nS -> ""'))


def oracle_allowed(state, vocab):
    """Independent mask oracle: trial-advance every token string."""
    out = set()
    for tid, text in enumerate(vocab.entries):
        if tid == vocab.eos_id:
            if state.is_complete():
                out.add(tid)
            continue
        nxt, _ = state.advance_string(text)
        if nxt is not None:
            out.add(tid)
    return out


class TestVocabulary:
    def test_valid(self):
        v = make_vocab(["a", "ab", "b"])
        assert v.size == 4 and v.eos_id == 3

    def test_eos_must_be_empty(self):
        with pytest.raises(VocabularyError):
            Vocabulary(["a", "b"], eos_id=0)

    def test_non_eos_must_be_nonempty(self):
        with pytest.raises(VocabularyError):
            Vocabulary(["a", "", ""], eos_id=2)

    def test_dense_ids(self):
        with pytest.raises(VocabularyError):
            Vocabulary.from_pairs([(0, "a"), (2, "b"), (3, "")], eos_id=3)

    def test_jsonl_round_trip(self):
        v = make_vocab(["a", "ab", "über"])
        assert load_vocab_jsonl(dump_vocab_jsonl(v)).entries == v.entries

    def test_jsonl_requires_eos_header(self):
        with pytest.raises(VocabularyError):
            load_vocab_jsonl('{"id": 0, "text": "a"}')

    def test_detokenize_skips_eos(self):
        v = make_vocab(["a", "b"])
        assert v.detokenize([0, 1, v.eos_id]) == "ab"


class TestTrie:
    def test_terminal_markers(self):
        v = make_vocab(["a", "ab", "b"])
        t = build_trie(v)
        assert t.lookup("a") == [0]
        assert t.lookup("ab") == [1]
        assert t.lookup("b") == [2]
        assert t.lookup("ba") == []

    def test_exhaustive_lookup_random_vocab(self):
        rng = random.Random(3)
        tokens = set()
        while len(tokens) < 1000:
            tokens.add(
                "".join(rng.choice("abcdef") for _ in range(rng.randint(1, 6)))
            )
        v = make_vocab(sorted(tokens))
        t = build_trie(v)
        for tid, text in enumerate(v.entries):
            if tid != v.eos_id:
                assert tid in t.lookup(text)


class TestAllowedTokens:
    def test_empty_prefix(self):
        v = make_vocab(["a", "b", "ab", "aa"])
        t = build_trie(v)
        s = init_state(ANBN)
        # eos legal because the empty string is in the language
        assert allowed_tokens(s, t) == {0, 2, 3, v.eos_id}

    def test_after_aab(self):
        v = make_vocab(["a", "b", "ab", "aa"])
        t = build_trie(v)
        s, _ = init_state(ANBN).advance_string("aab")
        assert allowed_tokens(s, t) == {1}

    def test_vocab_disjoint_from_alphabet(self):
        v = make_vocab(["x", "y"])
        t = build_trie(v)
        s = init_state(ANBN)
        assert allowed_tokens(s, t) == {v.eos_id}  # only eos: epsilon in L
        g = reduce(parse_grammar('S -> "a"'))
        assert allowed_tokens(init_state(g), build_trie(v)) == set()

    def test_mask_exactness_random(self):
        rng = random.Random(99)
        for g, lang in random_grammars(60, seed=13, max_lang=200):
            vocab = random_vocab(rng)
            trie = build_trie(vocab)
            words = sorted(w[:k] for w in lang for k in range(min(len(w), 6) + 1))
            states = {"": init_state(g)}
            for word in sorted(set(words), key=lambda w: (len(w), w)):
                if word:
                    states[word] = states[word[:-1]].advance_char(word[-1])
                state = states[word]
                assert allowed_tokens(state, trie) == oracle_allowed(state, vocab)

    def test_dense_mask_view(self):
        assert dense_mask({1, 3}, 5) == [False, True, False, True, False]


class TestAdvanceToken:
    def test_matches_char_advance(self):
        v = make_vocab(["a", "b", "ab"])
        t = build_trie(v)
        s = init_state(ANBN)
        via_token = advance_token(s, t, 2)
        via_chars, _ = s.advance_string("ab")
        assert via_token.is_complete() and via_chars.is_complete()
        assert via_token.consumed == via_chars.consumed == 2

    def test_spelling_aabb(self):
        v = make_vocab(["a", "b", "ab"])
        t = build_trie(v)
        s = init_state(ANBN)
        for tid in (0, 0, 1, 1):
            s = advance_token(s, t, tid)
        assert s.is_complete()

    def test_disallowed_token(self):
        v = make_vocab(["a", "b"])
        t = build_trie(v)
        with pytest.raises(DisallowedTokenError):
            advance_token(init_state(ANBN), t, 1)

    def test_eos_not_advanceable(self):
        v = make_vocab(["a"])
        t = build_trie(v)
        with pytest.raises(DisallowedTokenError):
            advance_token(init_state(ANBN), t, v.eos_id)

    def test_masked_token_paths_stay_viable(self):
        # replaying any token path kept inside the mask spells a viable prefix
        rng = random.Random(5)
        for g, lang in random_grammars(25, seed=77, max_lang=200):
            vocab = random_vocab(rng)
            trie = build_trie(vocab)
            for _ in range(5):
                state = init_state(g)
                spelled = ""
                for _ in range(4):
                    mask = allowed_tokens(state, trie) - {vocab.eos_id}
                    if not mask:
                        break
                    tid = rng.choice(sorted(mask))
                    state = advance_token(state, trie, tid)
                    spelled += vocab.entries[tid]
                    check, _ = init_state(g).advance_string(spelled)
                    assert check is not None, (g, spelled)
