"""Deterministic benchmark split generation and metric reporting.

Splits are sampled by whole dialogues so that every turn of a dialogue
lands in exactly one split. Three low-resource train sets, one medium
train/dev pair (omitted for small datasets), a full-train high tier, and
2000/100-example test samples are emitted, all reproducible from a seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import (
    EvaluationError,
    MetricNotSupportedError,
    SexpError,
    SplitError,
)
from .lispress import lispress_equal

LOW_TRAIN_SIZE = 500
LOW_DEV_SIZE = 50
MED_TRAIN_SIZE = 5000
MED_DEV_SIZE = 500
TEST_SIZE = 2000
SMALL_TEST_SIZE = 100


@dataclass
class DatasetExample:
    """One benchmark record; `portion` marks the source pool."""

    id: str
    utterance: str
    gold: str
    dialogue_id: str = ""
    turn_index: int = 0
    last_user_utt: str = ""
    last_agent_utt: str = ""
    prior_interactions: list = field(default_factory=list)
    schema: object = None  # DbSchema for SQL datasets
    portion: str = ""  # "train" | "dev" | "test"


def load_dataset_jsonl(text: str, schema_loader=None):
    """Parse dataset JSONL records into DatasetExamples."""
    from .sql import load_schema_json

    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SplitError(f"bad JSON on line {lineno}: {exc}") from None
        schema = rec.get("schema")
        if isinstance(schema, dict):
            schema = load_schema_json(json.dumps(schema))
        out.append(
            DatasetExample(
                id=str(rec["id"]),
                utterance=rec.get("utterance", ""),
                gold=rec.get("gold", ""),
                dialogue_id=rec.get("dialogue_id", ""),
                turn_index=rec.get("turn_index", 0),
                last_user_utt=rec.get("last_user_utt", ""),
                last_agent_utt=rec.get("last_agent_utt", ""),
                prior_interactions=list(rec.get("prior_interactions", [])),
                schema=schema,
                portion=rec.get("portion", ""),
            )
        )
    return out


@dataclass
class SplitSpec:
    """Example-id lists per split, plus the generating seed."""

    seed: int
    low_train: list  # three id lists
    low_dev: list
    med_train: list | None
    med_dev: list
    high_train: list
    test_2k: list
    test_100: list

    def to_manifest(self) -> str:
        data = {
            "seed": self.seed,
            "low_train": self.low_train,
            "low_dev": self.low_dev,
            "med_train": self.med_train,
            "med_dev": self.med_dev,
            "high_train": self.high_train,
            "test_2k": self.test_2k,
            "test_100": self.test_100,
        }
        return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _dialogue_groups(examples):
    """Group ids by dialogue; non-dialogue examples are singleton groups.
    Order follows first appearance, so results depend only on input order."""
    groups = []
    index = {}
    for ex in examples:
        key = ex.dialogue_id or f"\x00{ex.id}"
        if key not in index:
            index[key] = len(groups)
            groups.append([])
        groups[index[key]].append(ex.id)
    return groups


def _sample_groups(groups, target, rng):
    """Whole dialogues until the target is met; may overshoot by part of
    the final dialogue, never by a whole extra one."""
    order = list(range(len(groups)))
    rng.shuffle(order)
    out = []
    for gi in order:
        if len(out) >= target:
            break
        out.extend(groups[gi])
    return out


def make_splits(
    dataset,
    has_public_test: bool = True,
    seed: int = 0,
    disjoint_low: bool = True,
) -> SplitSpec:
    """Carve the benchmark's split tiers out of a portioned dataset.

    When the dataset has no public test portion, the dev portion becomes
    the test pool and 10% of the train pool (by whole dialogues) becomes
    the dev pool. The medium tier is omitted when train has fewer than
    5000 examples.
    """
    import random

    if not dataset:
        raise SplitError("empty dataset")
    pools = {"train": [], "dev": [], "test": []}
    for ex in dataset:
        if ex.portion not in pools:
            raise SplitError(
                f"example {ex.id!r} has portion {ex.portion!r}; "
                "expected train/dev/test"
            )
        pools[ex.portion].append(ex)

    rng = random.Random(seed)
    if not has_public_test:
        if pools["test"]:
            raise SplitError("has_public_test=False but a test portion exists")
        pools["test"] = pools["dev"]
        train_groups = _dialogue_groups(pools["train"])
        dev_target = max(1, round(0.1 * len(pools["train"])))
        dev_ids = set(_sample_groups(train_groups, dev_target, rng))
        pools["dev"] = [ex for ex in pools["train"] if ex.id in dev_ids]
        pools["train"] = [ex for ex in pools["train"] if ex.id not in dev_ids]
    if not pools["test"]:
        raise SplitError("no test portion")
    if not pools["dev"]:
        raise SplitError("no dev portion")

    train_groups = _dialogue_groups(pools["train"])
    dev_groups = _dialogue_groups(pools["dev"])
    test_groups = _dialogue_groups(pools["test"])
    n_train = len(pools["train"])
    if n_train < LOW_TRAIN_SIZE:
        raise SplitError(
            f"train pool has {n_train} examples; need {LOW_TRAIN_SIZE} "
            "for one low-resource split"
        )

    # Three low train sets: mutually disjoint when the pool allows, for
    # cleaner variance estimates; independently sampled otherwise.
    low_train = []
    if disjoint_low and n_train >= 3 * LOW_TRAIN_SIZE:
        order = list(range(len(train_groups)))
        rng_low = random.Random(f"{seed}:low")
        rng_low.shuffle(order)
        gi = 0
        for _ in range(3):
            ids = []
            while len(ids) < LOW_TRAIN_SIZE and gi < len(order):
                ids.extend(train_groups[order[gi]])
                gi += 1
            low_train.append(ids)
    else:
        for i in range(3):
            rng_i = random.Random(f"{seed}:low:{i}")
            low_train.append(_sample_groups(train_groups, LOW_TRAIN_SIZE, rng_i))

    low_dev = _sample_groups(dev_groups, LOW_DEV_SIZE, random.Random(f"{seed}:lowdev"))
    med_dev = _sample_groups(dev_groups, MED_DEV_SIZE, random.Random(f"{seed}:meddev"))
    med_train = None
    if n_train >= MED_TRAIN_SIZE:
        med_train = _sample_groups(
            train_groups, MED_TRAIN_SIZE, random.Random(f"{seed}:med")
        )
    high_train = [ex.id for ex in pools["train"]]

    test_2k = _sample_groups(test_groups, TEST_SIZE, random.Random(f"{seed}:test"))
    test_2k_set = set(test_2k)
    sub_groups = [
        [i for i in g if i in test_2k_set]
        for g in test_groups
        if any(i in test_2k_set for i in g)
    ]
    test_100 = _sample_groups(
        sub_groups, SMALL_TEST_SIZE, random.Random(f"{seed}:test100")
    )
    return SplitSpec(
        seed=seed,
        low_train=low_train,
        low_dev=low_dev,
        med_train=med_train,
        med_dev=med_dev,
        high_train=high_train,
        test_2k=test_2k,
        test_100=test_100,
    )


# ---------------------------------------------------------------------------
# Metrics


@dataclass
class MetricReport:
    metric: str
    accuracy: float
    n: int
    correct: list  # (example id, bool)
    parse_failures: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "metric": self.metric,
                "accuracy": self.accuracy,
                "n": self.n,
                "parse_failures": self.parse_failures,
                "correct": [[i, bool(c)] for i, c in self.correct],
            },
            indent=2,
        ) + "\n"


_UNSUPPORTED = {"denotation", "denotation_match", "execution", "test_suite_execution"}


def evaluate(predictions, gold, metric: str) -> MetricReport:
    """Score predictions against gold examples.

    `predictions` is an iterable of (id, text); missing ids count as
    incorrect, duplicate ids are an error. For the lispress metric a
    prediction that fails to parse counts incorrect and is tallied in
    parse_failures.
    """
    if metric in _UNSUPPORTED:
        raise MetricNotSupportedError(
            f"metric {metric!r} requires an executor and is not supported"
        )
    if metric not in ("exact", "lispress"):
        raise MetricNotSupportedError(f"unknown metric {metric!r}")
    pred_map = {}
    for pid, text in predictions:
        if pid in pred_map:
            raise EvaluationError(f"duplicate prediction id {pid!r}")
        pred_map[pid] = text
    gold_ids = {ex.id for ex in gold}
    unknown = set(pred_map) - gold_ids
    if unknown:
        raise EvaluationError(f"predictions for unknown ids: {sorted(unknown)}")

    correct = []
    parse_failures = 0
    for ex in gold:
        pred = pred_map.get(ex.id)
        if pred is None:
            correct.append((ex.id, False))
            continue
        if metric == "exact":
            correct.append((ex.id, pred == ex.gold))
        else:
            try:
                ok = lispress_equal(pred, ex.gold)
            except SexpError:
                parse_failures += 1
                ok = False
            correct.append((ex.id, ok))
    n = len(gold)
    acc = sum(1 for _, ok in correct if ok) / n if n else 0.0
    return MetricReport(metric, acc, n, correct, parse_failures)


def aggregate_low(reports):
    """Mean and population standard deviation over the three low splits."""
    if len(reports) != 3:
        raise EvaluationError("aggregate_low takes exactly 3 reports")
    accs = [r.accuracy if isinstance(r, MetricReport) else float(r) for r in reports]
    mean = sum(accs) / 3.0
    var = sum((a - mean) ** 2 for a in accs) / 3.0
    return mean, math.sqrt(var)
