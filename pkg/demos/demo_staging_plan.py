"""Size an SSD staging tier for a 128-node simulation cluster.

Walks the full planning chain: how many compute nodes one staging node can
serve (capacity and bandwidth limits), how long analysis and checkpoint
output take to drain, the minimum kernel throughput worth offloading, and
the per-iteration energy bill.
"""
import numpy as np

from dwkit.staging import (AnalysisKernel, ClusterConfig, Workload,
                           min_kernel_throughput, plan, s_bandwidth,
                           s_capacity)

GB = 1e9

cluster = ClusterConfig(n_compute=128, bw_pfs=50 * GB, bw_host2ssd=3 * GB,
                        bw_fm2c=2 * GB, bw_c2m=2 * GB, c_ssd=512 * GB,
                        p_active=50.0, p_idle=5.0)
workload = Workload(lambda_a=2 * GB, lambda_c=8 * GB, num_chkpts=3,
                    interval=3600.0, alpha=0.1)
kernels = [AnalysisKernel("histogram", 1.0 * GB),
           AnalysisKernel("feature-track", 0.002 * GB),
           AnalysisKernel("compress", 0.5 * GB)]

print("capacity limit : %.2f compute nodes per staging node"
      % s_capacity(cluster, workload))
print("bandwidth limit: %.2f compute nodes per staging node"
      % s_bandwidth(cluster))

result = plan(cluster, workload, kernels)
print("\nchosen staging ratio S = %d" % result.s)
print("analysis drain  t_a = %.3f s" % result.t_a)
print("checkpoint drain t_c = %.3f s" % result.t_c)
print("iteration fits in the %.0f s interval: %s"
      % (workload.interval, result.feasible))

t_min = result.t_ssd_min
print("\noffload threshold: %.5f GB/s sustained" % (t_min / GB))
for k in kernels:
    verdict = "offload" if result.offload_verdicts[k.name] else "keep inline"
    print("  %-14s %8.4f GB/s -> %s"
          % (k.name, k.throughput / GB, verdict))

e = result.energy
print("\nenergy per iteration (whole cluster):")
for label, joules in [("node -> SSD", e.e_node2ssd),
                      ("analysis", e.e_active),
                      ("SSD -> PFS", e.e_ssd2pfs),
                      ("idle", e.e_idle)]:
    print("  %-12s %12.1f J" % (label, joules))
print("  %-12s %12.1f J" % ("total", e.total))

# the threshold is sharp: sweep kernels around it and watch the flip
print("\nfeasibility sweep around the threshold:")
for frac in np.array([0.5, 0.9, 0.99, 1.01, 1.1, 2.0]):
    k = AnalysisKernel("sweep", t_min * frac)
    t = min_kernel_throughput(cluster, workload, result.s)
    print("  %.2f x t_min -> offloadable: %s"
          % (frac, k.throughput > t))
