"""Constrained beam search over a pluggable next-token scorer.

The constrained and unconstrained paths share everything except mask
application, so comparing the two isolates the constraint system. In
constrained mode eos is only offered at complete states and every returned
string is a member of the grammar's language; unfinished hypotheses are
dropped at the token budget rather than returned truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .earley import init_state
from .errors import NoViableHypothesisError, ScorerError
from .grammar import Grammar
from .tokens import TokenTrie, Vocabulary, advance_token, allowed_tokens, build_trie


class Scorer:
    """Contract: score(prefix, conditioning) returns one finite log-score per
    vocabulary id, deterministically. Implementations must tolerate
    concurrent calls or document serialized access."""

    def score(self, prefix: tuple, conditioning: str):
        raise NotImplementedError


@dataclass
class DecodeConfig:
    beam_size: int = 5
    max_tokens: int = 128
    constrained: bool = True
    length_normalize: bool = False

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


@dataclass
class Hypothesis:
    tokens: tuple
    logprob: float
    state: object  # PrefixState, or None when unconstrained
    finished: bool = False


@dataclass
class DecodeResult:
    text: str
    logprob: float
    tokens: tuple

    def as_pair(self):
        return self.text, self.logprob


def _checked_scores(scorer, prefix, conditioning, size):
    scores = scorer.score(prefix, conditioning)
    if len(scores) != size:
        raise ScorerError(
            f"scorer returned {len(scores)} scores for vocabulary of {size}"
        )
    return scores


def decode(
    scorer: Scorer,
    grammar: Grammar | None,
    vocab: Vocabulary,
    cfg: DecodeConfig,
    conditioning: str = "",
    trie: TokenTrie | None = None,
):
    """Beam search; returns DecodeResults sorted best-first.

    Ties on equal score break by lexicographic token-id order, then beam
    slot, so runs are deterministic. Scores are exact sums of the chosen
    per-step log-scores (optionally length-normalized for the final
    ranking only).
    """
    if cfg.constrained:
        if grammar is None:
            raise ValueError("constrained decoding requires a grammar")
        if trie is None:
            trie = build_trie(vocab)
        root = init_state(grammar)
    else:
        root = None
    active = [Hypothesis(tokens=(), logprob=0.0, state=root)]
    finished = []
    eos = vocab.eos_id

    for _ in range(cfg.max_tokens):
        candidates = []  # (score, token id, slot)
        for slot, hyp in enumerate(active):
            scores = _checked_scores(scorer, hyp.tokens, conditioning, vocab.size)
            if cfg.constrained:
                legal = sorted(allowed_tokens(hyp.state, trie))
            else:
                legal = range(vocab.size)
            for tid in legal:
                s = scores[tid]
                if not math.isfinite(s):
                    raise ScorerError(f"non-finite score for token {tid}")
                candidates.append((hyp.logprob + s, tid, slot))
        if not candidates:
            break
        candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
        next_active = []
        for score, tid, slot in candidates[: cfg.beam_size]:
            parent = active[slot]
            if tid == eos:
                finished.append(
                    Hypothesis(parent.tokens + (eos,), score, parent.state, True)
                )
            else:
                state = (
                    advance_token(parent.state, trie, tid)
                    if cfg.constrained
                    else None
                )
                next_active.append(
                    Hypothesis(parent.tokens + (tid,), score, state)
                )
        active = next_active
        if not active:
            break

    pool = list(finished)
    if not cfg.constrained:
        # Unfinished hypotheses compete as-is; constrained mode drops them
        # since a truncated prefix is not a language member.
        pool.extend(active)
    if not pool:
        raise NoViableHypothesisError(
            "constrained beam emptied before any hypothesis finished"
        )

    def rank_key(h: Hypothesis):
        score = h.logprob
        if cfg.length_normalize and h.tokens:
            score = score / len(h.tokens)
        return (-score, h.tokens)

    pool.sort(key=rank_key)
    out = []
    for h in pool:
        norm = h.logprob / len(h.tokens) if cfg.length_normalize and h.tokens else h.logprob
        out.append(DecodeResult(vocab.detokenize(h.tokens), norm, h.tokens))
    return out


# ---------------------------------------------------------------------------
# Built-in scorers


_BOS = -1


class NgramScorer(Scorer):
    """Add-one-smoothed n-gram language model over token ids.

    Contexts are the last order-1 ids, left-padded with a BOS marker;
    conditioning text is ignored (the model is unconditional).
    """

    def __init__(self, order: int, vocab_size: int, context_counts, context_totals):
        self.order = order
        self.vocab_size = vocab_size
        self._counts = context_counts  # ctx tuple -> {token id: count}
        self._totals = context_totals  # ctx tuple -> total count

    def score(self, prefix, conditioning=""):
        ctx = self._context(prefix)
        counts = self._counts.get(ctx, {})
        total = self._totals.get(ctx, 0)
        denom = total + self.vocab_size
        return [
            math.log((counts.get(t, 0) + 1) / denom)
            for t in range(self.vocab_size)
        ]

    def _context(self, prefix):
        k = self.order - 1
        if k == 0:
            return ()
        padded = (_BOS,) * k + tuple(prefix)
        return padded[len(padded) - k :]


def train_ngram(corpus, order: int, vocab_size: int | None = None) -> NgramScorer:
    """Fit an add-one n-gram scorer on token-id sequences (eos included)."""
    if not 1 <= order <= 5:
        raise ValueError("order must be in [1, 5]")
    if not corpus:
        raise ValueError("empty training corpus")
    if vocab_size is None:
        vocab_size = max(max(seq) for seq in corpus if seq) + 1
    k = order - 1
    counts: dict = {}
    totals: dict = {}
    for seq in corpus:
        padded = (_BOS,) * k + tuple(seq)
        for i in range(k, len(padded)):
            ctx = padded[i - k : i]
            tok = padded[i]
            bucket = counts.setdefault(ctx, {})
            bucket[tok] = bucket.get(tok, 0) + 1
            totals[ctx] = totals.get(ctx, 0) + 1
    return NgramScorer(order, vocab_size, counts, totals)


class HttpScorer(Scorer):
    """Scorer backed by a JSON-over-HTTP service.

    Request: {"conditioning": str, "prefix": [ids]}; response: {"scores":
    [vocab-size floats]}. Transport failures and non-200 responses raise
    ScorerError; they are never silently turned into masks.
    """

    def __init__(self, url: str, timeout: float = 10.0, session=None):
        import requests

        self.url = url
        self.timeout = timeout
        self._session = session or requests.Session()

    def score(self, prefix, conditioning=""):
        import requests

        try:
            resp = self._session.post(
                self.url,
                json={"conditioning": conditioning, "prefix": list(prefix)},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise ScorerError(f"scorer request failed: {exc}") from None
        if resp.status_code != 200:
            raise ScorerError(f"scorer returned HTTP {resp.status_code}")
        try:
            scores = resp.json()["scores"]
        except (ValueError, KeyError) as exc:
            raise ScorerError(f"bad scorer response: {exc}") from None
        return scores
