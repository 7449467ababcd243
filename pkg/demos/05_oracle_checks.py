"""Cross-check the production numerics against independent references.

Each production kernel has a brute-force counterpart that shares no code
with it: an angle-grid scan for the d=2 alignment, central differences for
the subgradient, and a from-scratch tridiagonalization + QL eigensolver.
This is the same battery the `verify` command exposes.
"""

from rotsync.cli import SUITE_NAMES, run_verify_suites

results = run_verify_suites(SUITE_NAMES)
for name, ok, detail in results:
    print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"     {detail}")

assert all(ok for _, ok, _ in results), "an oracle disagreed with production code"
print("\nall oracle suites agree with the production paths")
