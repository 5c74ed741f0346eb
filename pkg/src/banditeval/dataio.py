"""Text round-trip for logged datasets.

Line-oriented format: a header ``d=<int> k=<int> logging=<tag>``, then
one record per line as ``r a x_1 ... x_d`` (reward first), floats with
17 significant digits so the round trip is bit-exact.  An optional
trailing ``pool=<comma-separated ids>`` field annotates the action pool
available when the record was logged; absent means the full pool.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import LoggedDataset, ParseError


def save_dataset(dataset: LoggedDataset, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write(f"d={dataset.d} k={dataset.k} logging={dataset.logging}\n")
        for i in range(len(dataset)):
            fields = [str(int(dataset.rewards[i])), str(int(dataset.actions[i]))]
            fields.extend(format(v, ".17g") for v in dataset.contexts[i])
            if dataset.pools is not None:
                fields.append("pool=" + ",".join(str(a) for a in sorted(dataset.pools[i])))
            fh.write(" ".join(fields) + "\n")


def _parse_header(line: str) -> tuple[int, int, str]:
    try:
        items = dict(part.split("=", 1) for part in line.split())
        return int(items["d"]), int(items["k"]), items["logging"]
    except (ValueError, KeyError):
        raise ParseError(f"bad header {line!r}; expected 'd=<int> k=<int> "
                         "logging=<uniform|unknown>'", 1) from None


def load_dataset(path: str | Path) -> LoggedDataset:
    """Parse a dataset file; raises `ParseError` with the offending line
    number, or `DimensionMismatch` when well-formed values violate the
    declared d, K."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ParseError("empty dataset file", 1)
    d, k, logging = _parse_header(lines[0])
    rewards: list[int] = []
    actions: list[int] = []
    contexts: list[list[float]] = []
    pools: list[frozenset[int]] = []
    saw_pool = False
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split()
        pool: frozenset[int] | None = None
        if fields and fields[-1].startswith("pool="):
            try:
                pool = frozenset(int(a) for a in fields[-1][5:].split(","))
            except ValueError:
                raise ParseError(f"bad pool field {fields[-1]!r}", lineno) from None
            fields = fields[:-1]
            saw_pool = True
        if len(fields) != 2 + d:
            raise ParseError(
                f"expected {2 + d} fields (reward, action, {d} context values), "
                f"got {len(fields)}", lineno)
        try:
            rewards.append(int(fields[0]))
            actions.append(int(fields[1]))
            contexts.append([float(v) for v in fields[2:]])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        pools.append(pool if pool is not None else frozenset(range(k)))
    if not contexts:
        raise ParseError("dataset has no records", len(lines))
    return LoggedDataset(
        np.array(contexts, dtype=np.float64),
        np.array(actions, dtype=np.int64),
        np.array(rewards, dtype=np.int64),
        d=d, k=k, logging=logging,
        pools=tuple(pools) if saw_pool else None)
