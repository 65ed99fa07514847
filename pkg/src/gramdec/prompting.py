"""BM25 example retrieval and few-shot prompt construction.

Prompt layout: a fixed header line, then Human/Computer blocks for each
retrieved example, then the target's Human block with a dangling
"Computer:" for the model to complete. Examples are chosen greedily by
relevance under a token budget, then arranged per the ordering strategy;
ordering never changes which examples are included.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import PromptError
from .sql import render_schema
from .splits import DatasetExample

HEADER = "Let's translate what a human user says into what a computer might say."
DEFAULT_BUDGET = 1500
DEFAULT_MAX_EXAMPLES = 20

# Dialogue context modes
MODE_NONE = "none"
MODE_LAST_AGENT = "last_agent"
MODE_LAST_USER_AND_AGENT = "last_user_and_agent"
# SQL context modes (schema rendering is always present)
MODE_SQL_NONE = "sql_none"
MODE_SQL_LAST_INTERACTION = "sql_last_interaction"
MODE_SQL_ALL_INTERACTIONS = "sql_all_interactions"

DIALOGUE_MODES = (MODE_NONE, MODE_LAST_AGENT, MODE_LAST_USER_AND_AGENT)
SQL_MODES = (MODE_SQL_NONE, MODE_SQL_LAST_INTERACTION, MODE_SQL_ALL_INTERACTIONS)


@dataclass(frozen=True)
class ContextMode:
    name: str
    with_values: bool = False

    def __post_init__(self):
        if self.name not in DIALOGUE_MODES + SQL_MODES:
            raise ValueError(f"unknown context mode {self.name!r}")
        if self.with_values and self.name not in SQL_MODES:
            raise ValueError("with_values only applies to SQL modes")


def render_input(ex: DatasetExample, mode: ContextMode) -> str:
    """Render context plus utterance with the benchmark's separators:
    dialogue ``l | a | u`` / ``a | u`` / ``u``; SQL ``c | d , u`` where c
    joins prior interactions with `` | `` and d is the schema rendering."""
    if mode.name == MODE_NONE:
        return ex.utterance
    if mode.name == MODE_LAST_AGENT:
        return f"{ex.last_agent_utt} | {ex.utterance}"
    if mode.name == MODE_LAST_USER_AND_AGENT:
        return f"{ex.last_user_utt} | {ex.last_agent_utt} | {ex.utterance}"
    # SQL family
    if ex.schema is None:
        raise PromptError(f"example {ex.id!r} has no schema for SQL rendering")
    d = render_schema(ex.schema, with_values=mode.with_values)
    if mode.name == MODE_SQL_NONE:
        prior = []
    elif mode.name == MODE_SQL_LAST_INTERACTION:
        prior = list(ex.prior_interactions[-1:])
    else:
        prior = list(ex.prior_interactions)
    if prior:
        c = " | ".join(prior)
        return f"{c} | {d} , {ex.utterance}"
    return f"{d} , {ex.utterance}"


# ---------------------------------------------------------------------------
# Okapi BM25


def _terms(text: str):
    return text.lower().split()


def bm25_scores(query: str, pool, k1: float = 1.2, b: float = 0.75):
    """Okapi BM25 score of each pool document against the query.

    idf uses the standard 0.5-smoothed form ln((N - df + 0.5)/(df + 0.5)).
    """
    docs = [_terms(doc) for doc in pool]
    n = len(docs)
    if n == 0:
        return []
    avgdl = sum(len(d) for d in docs) / n
    dfs: dict = {}
    for d in docs:
        for t in set(d):
            dfs[t] = dfs.get(t, 0) + 1
    scores = []
    q_terms = _terms(query)
    for d in docs:
        tf: dict = {}
        for t in d:
            tf[t] = tf.get(t, 0) + 1
        dl = len(d)
        s = 0.0
        for t in q_terms:
            f = tf.get(t, 0)
            if f == 0:
                continue
            df = dfs[t]
            idf = math.log((n - df + 0.5) / (df + 0.5))
            norm = 1 - b + b * (dl / avgdl) if avgdl else 1.0
            s += idf * f * (k1 + 1) / (f + k1 * norm)
        scores.append(s)
    return scores


def bm25_rank(query: str, pool, k1: float = 1.2, b: float = 0.75):
    """Pool indices best-first; ties keep pool order."""
    scores = bm25_scores(query, pool, k1=k1, b=b)
    return sorted(range(len(pool)), key=lambda i: (-scores[i], i))


# ---------------------------------------------------------------------------
# Prompt construction


@dataclass(frozen=True)
class PromptExample:
    uc: str
    p: str
    relevance: float

    def __post_init__(self):
        if not self.uc:
            raise PromptError("prompt example has empty input rendering")
        if not math.isfinite(self.relevance):
            raise PromptError("prompt example has non-finite relevance")


ORDER_RANDOM = "random"
ORDER_BEST_FIRST = "best_first"
ORDER_BEST_LAST = "best_last"


@dataclass
class Prompt:
    text: str
    examples: list  # included PromptExamples, in emitted order

    @property
    def n_examples(self) -> int:
        return len(self.examples)


def whitespace_tokens(text: str) -> int:
    """Default token counter; plug in a real tokenizer's counter when the
    target model is known."""
    return len(text.split())


def _assemble(examples, target: str) -> str:
    parts = [HEADER]
    for ex in examples:
        parts.append(f"Human: {ex.uc}")
        parts.append(f"Computer: {ex.p}")
    parts.append(f"Human: {target}")
    parts.append("Computer:")
    return "\n".join(parts)


def build_prompt(
    examples,
    target: str,
    order: str = ORDER_BEST_LAST,
    budget: int = DEFAULT_BUDGET,
    counter=whitespace_tokens,
    max_examples: int = DEFAULT_MAX_EXAMPLES,
    seed: int = 0,
) -> Prompt:
    """Greedy budget-limited prompt assembly.

    Examples are taken most-relevant-first until the next block would
    exceed the budget or the example cap; the included set is then
    arranged per `order` (best_last puts the most relevant example
    immediately before the target block).
    """
    if order not in (ORDER_RANDOM, ORDER_BEST_FIRST, ORDER_BEST_LAST):
        raise PromptError(f"unknown ordering {order!r}")
    if counter(_assemble([], target)) > budget:
        raise PromptError("budget too small for the header and target block")

    ranked = sorted(
        range(len(examples)), key=lambda i: (-examples[i].relevance, i)
    )
    included = []
    for i in ranked:
        if len(included) >= max_examples:
            break
        trial = included + [examples[i]]
        if counter(_assemble(trial, target)) > budget:
            break
        included = trial

    if order == ORDER_BEST_FIRST:
        arranged = included
    elif order == ORDER_BEST_LAST:
        arranged = list(reversed(included))
    else:
        arranged = list(included)
        random.Random(seed).shuffle(arranged)
    return Prompt(_assemble(arranged, target), arranged)
