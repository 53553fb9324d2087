"""How sources, helper pairs and success probability scale with (d, n).

The helper-pair count per junction is the number of same-parity path pairs,
ceil(d(d-2)/4); the whole chain needs one junction per added source.  The
success probability with feedforward is 1/d**(ceil(n/2)-1) / 2**N.  The rule
backend re-derives every number by simulation so the table doubles as a
consistency check.
"""

import ghzforge as gf
from ghzforge import analysis

print(f"{'d':>2} {'n':>2} {'sources':>7} {'helpers':>7} "
      f"{'filter rate':>11} {'predicted':>12} {'simulated':>12} {'fidelity':>10}")
for d in (2, 3, 4, 5):
    for n in (4, 6, 8):
        summary = gf.resource_summary(d, n)
        report = gf.run(d, n, feedforward=True, backend="rule")
        print(
            f"{d:>2} {n:>2} {summary.epr_count:>7} {summary.aux_count:>7} "
            f"{summary.eta1:>11.4f} {summary.predicted_prob_ff:>12.3e} "
            f"{report.prob:>12.3e} {report.fidelity:>10.6f}"
        )

print("\nper-stage survival rates for d=5 (paper-style accounting):")
rates = [analysis.eta2(5, k) for k in range(1, gf.aux_count(5, 4) + 1)]
print("  parity filter:", analysis.eta1(5))
print("  helper stages:", [round(r, 4) for r in rates])
product = analysis.eta1(5)
for r in rates:
    product *= r
print(f"  product: {product:.6f}  vs closed form {analysis.predicted_prob(5, 4):.6f}")
