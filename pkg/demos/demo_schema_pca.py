"""Propose warehouse dimension tables from column correlations.

Generates a synthetic operational table whose columns fall into two
correlated families plus one independent column, then runs the
correlate -> extract -> accumulate -> select pipeline and prints the
resulting dimension proposal.
"""
import numpy as np

from dwkit.schema_pca import NumericMatrix, design_schema

rng = np.random.default_rng(7)
n = 400

# family one: order volume drives revenue and shipping cost
volume = rng.normal(size=n)
revenue = 3.0 * volume + 0.3 * rng.normal(size=n)
shipping = 1.5 * volume + 0.4 * rng.normal(size=n)

# family two: session length drives page views
session = rng.normal(size=n)
views = 2.0 * session + 0.3 * rng.normal(size=n)

# and one column correlated with nothing
latency = rng.normal(size=n)

data = NumericMatrix(
    values=np.column_stack([volume, revenue, shipping, session, views,
                            latency]),
    col_names=["volume", "revenue", "shipping", "session", "views",
               "latency"])

proposal = design_schema(data, threshold=0.9)
pca = proposal.pca

print("eigenvalues:", np.round(pca.eigenvalues, 3))
print("cumulative variance:", np.round(pca.cumulative, 3))
print("components kept:", len(pca.selected))

print("\nloadings of the retained components:")
for i, name in enumerate(pca.col_names):
    row = " ".join("%7.3f" % pca.eigenvectors[i, k] for k in pca.selected)
    print("  %-9s %s" % (name, row))

print("\nproposed dimension tables:")
for dim, members in zip(proposal.proposed_dimensions, proposal.factors):
    print("  %s: %s" % (dim, ", ".join(members)))
if proposal.unassigned:
    print("left in the fact table (no loading above the floor): %s"
          % ", ".join(proposal.unassigned))
