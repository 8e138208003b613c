"""MapReduce executor over datastore chunks.

Map tasks (one per chunk) run on a thread pool; their keyed output is
published to the intermediate store only at task completion.  A barrier
separates the phases, then reduce tasks fold each key's values.  Failed
tasks re-execute from their chunk input up to an attempt cap; a test-only
failure injector exercises that path.  The result is sorted by key, so a
run is deterministic for any worker count and chunk size.
"""
from __future__ import annotations

import json
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import chunkstore
from .chunkstore import DataTable, Datastore
from .errors import TaskFailedError

DEFAULT_ATTEMPT_CAP = 3


class InjectedFailure(RuntimeError):
    """Raised by the test-only failure injector."""


@dataclass
class MapReduceResult:
    table: DataTable
    log: list[dict]


class _SchedulerLog:
    def __init__(self):
        self._events = []
        self._lock = threading.Lock()

    def emit(self, kind, **detail):
        with self._lock:
            self._events.append({"seq": len(self._events), "kind": kind,
                                 **detail})

    @property
    def events(self):
        return self._events


def write_log(events, path):
    with open(path, "w") as fh:
        for ev in events:
            fh.write(json.dumps(ev, sort_keys=True) + "\n")


def _run_task(task_id, kind, fn, attempt_cap, fail_injector, log):
    last_exc = None
    for attempt in range(1, attempt_cap + 1):
        log.emit(f"{kind}-start", task=task_id, attempt=attempt)
        try:
            if fail_injector is not None and fail_injector(kind, task_id,
                                                          attempt):
                raise InjectedFailure(f"{kind} task {task_id} "
                                      f"attempt {attempt}")
            out = fn()
        except Exception as exc:
            last_exc = exc
            log.emit(f"{kind}-failed", task=task_id, attempt=attempt,
                     error=str(exc))
            continue
        log.emit(f"{kind}-done", task=task_id, attempt=attempt)
        return out
    raise TaskFailedError(task_id, last_exc)


def _result_table(pairs):
    keys = [k for k, _ in pairs]
    values = [v for _, v in pairs]

    def column(data):
        if data and all(isinstance(v, (int, np.integer)) and
                        not isinstance(v, bool) for v in data):
            return np.array(data, dtype=np.int64), "integer"
        if data and all(isinstance(v, (int, float, np.number)) and
                        not isinstance(v, bool) for v in data):
            return np.array(data, dtype=float), "real"
        return np.array(data, dtype=object), "text"

    kcol, kkind = column(keys)
    vcol, vkind = column(values)
    n = len(pairs)
    missing = {"key": np.zeros(n, dtype=bool),
               "value": np.array([isinstance(v, float) and math.isnan(v)
                                  for v in values], dtype=bool)}
    return DataTable({"key": kcol, "value": vcol}, missing,
                     {"key": kkind, "value": vkind})


def mapreduce(ds: Datastore, map_fn, reduce_fn, *, workers=None,
              attempt_cap=DEFAULT_ATTEMPT_CAP, fail_injector=None,
              log_path=None) -> MapReduceResult:
    """Apply ``map_fn`` to every chunk and fold each key with ``reduce_fn``.

    ``map_fn(table)`` yields (key, value) pairs; ``reduce_fn(key, values)``
    returns the folded value for one key.  Values reach the reducer in
    chunk order, so the grouping is independent of task completion order.
    """
    if workers is None:
        workers = os.cpu_count() or 1
    log = _SchedulerLog()

    # enumerate chunk addresses up front; a task re-reads its own chunk
    tasks = []
    for fi in range(len(ds.sources)):
        for ci, _rows in chunkstore.iter_file_chunks(ds, fi):
            tasks.append((fi, ci))

    intermediate = {}   # task index -> list of (key, value), set when done
    with ThreadPoolExecutor(max_workers=workers) as pool:
        def map_task(idx, fi, ci):
            def body():
                chunk = chunkstore.read_chunk(ds, fi, ci)
                return list(map_fn(chunk))
            return idx, _run_task(f"map-{fi}-{ci}", "map", body,
                                  attempt_cap, fail_injector, log)

        futures = [pool.submit(map_task, idx, fi, ci)
                   for idx, (fi, ci) in enumerate(tasks)]
        for fut in futures:
            idx, pairs = fut.result()
            intermediate[idx] = pairs

        log.emit("barrier", maps=len(tasks))

        groups = {}
        for idx in range(len(tasks)):
            for key, value in intermediate[idx]:
                groups.setdefault(key, []).append(value)

        keys = sorted(groups)
        reduce_futures = [
            pool.submit(_run_task, f"reduce-{k}", "reduce",
                        (lambda key=k: (key, reduce_fn(key, groups[key]))),
                        attempt_cap, fail_injector, log)
            for k in keys]
        reduced = [fut.result() for fut in reduce_futures]

    table = _result_table(reduced)
    if log_path:
        write_log(log.events, log_path)
    return MapReduceResult(table=table, log=log.events)


# --- stock map/reduce functions (CLI building blocks) ---

def map_count_rows(table):
    yield "rows", table.nrows


def make_column_emitter(column, key=None):
    """Map function emitting every non-missing value of one column."""
    key = column if key is None else key

    def emit(table):
        for v in table.column(column, skip_missing=True):
            yield key, v
    return emit


def reduce_sum(key, values):
    return sum(values)


def reduce_mean(key, values):
    return sum(values) / len(values)


def reduce_max(key, values):
    return max(values)


def reduce_min(key, values):
    return min(values)

BUILTIN_REDUCERS = {"sum": reduce_sum, "mean": reduce_mean,
                    "max": reduce_max, "min": reduce_min}
