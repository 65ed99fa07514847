#!/usr/bin/env python3
"""Compare the compiled chart kernel against the pure-Python one.

Both kernels are built from the same source file, so this measures the
compilation win alone. Workloads: recognizing SQL queries character by
character, and computing next-character masks along the way.

Usage: python3 benchmarks/bench_kernel.py [--repeat N]
"""

import argparse
import importlib
import statistics
import time

from gramdec.earley import CompiledGrammar
from gramdec.grammar import reduce
from gramdec.sql import (
    DbColumn,
    DbSchema,
    DbTable,
    load_base_sql_grammar,
    specialize_sql_grammar,
)

SCHEMA = DbSchema(
    [
        DbTable("emp", [DbColumn("name"), DbColumn("salary"), DbColumn("dept")]),
        DbTable("dept", [DbColumn("id"), DbColumn("label")]),
    ]
)

QUERIES = [
    "SELECT name, salary FROM emp WHERE salary > 100 ORDER BY salary DESC",
    "SELECT emp.name FROM emp JOIN dept ON emp.dept = dept.id",
    "SELECT count(*) FROM emp GROUP BY dept HAVING count(*) >= 3",
    "SELECT name FROM emp WHERE dept IN (SELECT id FROM dept) LIMIT 10",
    "SELECT DISTINCT label FROM dept UNION SELECT name FROM emp",
]


def load_kernels():
    kernels = [("pure", importlib.import_module("gramdec.engine._impl"))]
    try:
        kernels.append(
            ("compiled", importlib.import_module("gramdec.engine._impl_cy"))
        )
    except ImportError:
        print("compiled kernel not built; benchmarking pure Python only")
    return kernels


def run_workload(kernel, tables):
    chart = kernel.initial_chart(tables)
    chars = masks = 0
    for q in QUERIES:
        cols = chart
        for i, c in enumerate(q):
            cols = kernel.advance(tables, cols, c)
            assert cols is not None, (q, i)
            chars += 1
            if i % 8 == 0:
                kernel.next_chars(tables, cols)
                masks += 1
        assert kernel.accepted(tables, cols)
    return chars, masks


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5, help="timed repetitions")
    args = ap.parse_args()

    grammar = reduce(specialize_sql_grammar(load_base_sql_grammar(), SCHEMA))
    tables = CompiledGrammar(grammar).tables

    results = {}
    for name, kernel in load_kernels():
        run_workload(kernel, tables)  # warm up
        times = []
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            chars, masks = run_workload(kernel, tables)
            times.append(time.perf_counter() - t0)
        best = min(times)
        results[name] = best
        print(
            f"{name:>8}: {best * 1e3:8.2f} ms best of {args.repeat} "
            f"(median {statistics.median(times) * 1e3:.2f} ms; "
            f"{chars} chars, {masks} masks per run)"
        )
    if "compiled" in results:
        print(f"speedup: {results['pure'] / results['compiled']:.2f}x")


if __name__ == "__main__":
    main()
