"""Chunked aggregation with fault-tolerant task re-execution.

Runs count/mean/max over the bundled server-records sample at several
chunk sizes, then repeats the job while injecting task failures to show
that retried maps re-read their chunk and the answer never changes.
"""
from dwkit import chunkstore
from dwkit.fixtures import server_records_path
from dwkit.mapreduce import (make_column_emitter, map_count_rows, mapreduce,
                             reduce_max, reduce_mean, reduce_sum)

for chunk_size in (1, 3, 8):
    ds = chunkstore.open_datastore(server_records_path(),
                                   chunk_size=chunk_size)
    count = mapreduce(ds, map_count_rows, reduce_sum)
    mean = mapreduce(ds, make_column_emitter("Delay"), reduce_mean)
    mx = mapreduce(ds, make_column_emitter("ActualElapsedTime"), reduce_max)
    print("chunk_size=%d  rows=%d  mean(Delay)=%.3f  max(AET)=%d"
          % (chunk_size, count.table.column("value")[0],
             mean.table.column("value")[0], mx.table.column("value")[0]))

# now make the first attempt of every map task blow up
print("\nwith every map task failing once:")
ds = chunkstore.open_datastore(server_records_path(), chunk_size=3)


def injector(kind, task_id, attempt):
    return kind == "map" and attempt == 1


result = mapreduce(ds, make_column_emitter("Delay"), reduce_mean,
                   fail_injector=injector)
print("mean(Delay) = %.3f (unchanged)" % result.table.column("value")[0])

failures = [e for e in result.log if e["kind"] == "map-failed"]
retries = [e for e in result.log if e["kind"] == "map-start"
           and e["attempt"] > 1]
print("scheduler log: %d failures, %d retries, barrier at seq %d"
      % (len(failures), len(retries),
         next(e["seq"] for e in result.log if e["kind"] == "barrier")))
