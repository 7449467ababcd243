"""Recovery quality as corruption and noise vary, at desk scale.

With no additive noise the solver recovers the ground truth exactly once
the fraction of true observations is large enough; with noise the final
distance levels off at a noise floor instead. The `sweep` command runs the
same protocol with full grids and seed averaging.
"""

import numpy as np

import rotsync as rs

n, q, repeats = 60, 0.3, 3
print(f"n={n}, q={q}, {repeats} seeds per cell")
print("p      sigma=0       sigma=1")
for p in (0.2, 0.4, 0.6, 0.8, 1.0):
    row = []
    for sigma in (0.0, 1.0):
        finals = []
        for seed in range(repeats):
            inst = rs.generate_instance(
                rs.RcmParams(n=n, d=3, p=p, q=q, sigma=sigma, seed=seed)
            )
            X0 = rs.spectrin(rs.dense_data_matrix(inst.graph), n, 3)
            config = rs.SolverConfig(mu0=1.0 / (n * p * q), gamma=0.9, max_iters=200)
            _, trace = rs.resync_run(inst.graph, config, X0, inst.ground_truth)
            finals.append(trace.dists[-1])
        row.append(np.mean(finals))
    print(f"{p:.1f}   {row[0]:.3e}    {row[1]:.3e}")
