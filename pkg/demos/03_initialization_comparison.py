"""Why the initializer builds two orientation candidates.

The top-d eigenspace determines the ground truth only up to an orthogonal
mixing, and when that mixing has determinant -1 the blockwise projection of
the raw basis lands far from every rotation stack. Selecting between the
basis and its mirrored copy (last eigenvector negated) by projection
residual repairs this. Roughly half of all seeds hit the bad orientation,
which is where the naive variant loses.
"""

import numpy as np

import rotsync as rs

n, d = 150, 3
selected, naive = [], []
for seed in range(30):
    params = rs.RcmParams(n=n, d=d, p=0.25, q=0.25, sigma=0.0, seed=seed)
    inst = rs.generate_instance(params)
    Y = rs.dense_data_matrix(inst.graph)
    selected.append(rs.dist(rs.spectrin(Y, n, d), inst.ground_truth))
    naive.append(rs.dist(rs.naive_spectrin(Y, n, d), inst.ground_truth))

selected = np.array(selected)
naive = np.array(naive)
print("seed   selected   naive")
for s in range(10):
    marker = "  <- orientation repaired" if naive[s] > selected[s] + 1e-9 else ""
    print(f"{s:4d}   {selected[s]:8.3f}   {naive[s]:8.3f}{marker}")
print(f"\nmean over 30 seeds: selected {selected.mean():.3f}, naive {naive.mean():.3f}")
print(f"selected <= naive on {100 * np.mean(selected <= naive):.0f}% of seeds")
