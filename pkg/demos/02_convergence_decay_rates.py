"""How the geometric decay factor shapes convergence.

Aggressive decay converges fastest but can freeze before reaching the
solution (the steps shrink too quickly); gentle decay is slower per
iteration but reliable. We run one desk-scale instance per decay factor
and print the distance trajectory, the same study the `run` command
reproduces at full scale with `--pq-rule log-cube`.
"""

import rotsync as rs

n = 150
ratio = rs.log_cube_ratio(n)
params = rs.RcmParams(n=n, d=3, p=ratio, q=ratio, sigma=0.0, seed=7)
inst = rs.generate_instance(params)
X0 = rs.spectrin(rs.dense_data_matrix(inst.graph), n, 3)
mu0 = 1.0 / (n * ratio * ratio)

print(f"n={n}, p=q={ratio:.3f}, {inst.graph.num_edges} edges, mu0={mu0:.3e}")
print("gamma   final dist   iterations   note")
for gamma in (0.7, 0.8, 0.85, 0.9, 0.95, 0.98):
    config = rs.SolverConfig(mu0=mu0, gamma=gamma, max_iters=500)
    _, trace = rs.resync_run(inst.graph, config, X0, inst.ground_truth)
    final = trace.dists[-1]
    note = "early stop" if final > 1e-6 else "recovered"
    print(f"{gamma:.2f}   {final:.3e}   {len(trace) - 1:5d}       {note}")

print("\ndistance every 50 iterations for gamma = 0.95:")
config = rs.SolverConfig(mu0=mu0, gamma=0.95, max_iters=500)
_, trace = rs.resync_run(inst.graph, config, X0, inst.ground_truth)
for k in range(0, len(trace), 50):
    print(f"  k={k:3d}  dist={trace.dists[k]:.3e}")
