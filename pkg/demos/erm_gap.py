"""Two empirical risk minimizers on the same class can need very different sample sizes.

The Cantor class over d instances has Natarajan dimension 1 but graph
dimension d. An ERM that only ever outputs labels it has seen ("good") learns
from a handful of examples, while an adversarial tie-breaker ("bad") keeps
failing until nearly every instance has been sampled.

    python3 demos/erm_gap.py [d] [trials]
"""

import math
import sys

from mclearn import (ErmPolicy, GShatterWitness, badlb_distribution, build_cantor_class, cantor_hypothesis,
                     estimate_sample_complexity, exact_unsampled_failure, graph_dim, natarajan_dim)


def main(d: int = 8, trials: int = 1000) -> None:
    eps, delta = 0.2, 0.1
    H = build_cantor_class(d)
    print(f"Cantor class: d={d}, k={H.k}, |H|={len(H)}")
    print(f"  Natarajan dimension {natarajan_dim(H)[0]}, graph dimension {graph_dim(H)[0]}")

    f0 = cantor_hypothesis(d, ())
    D = badlb_distribution(d, eps, f0, H.k, strict=False)
    print(f"  target: the all-* hypothesis; x_0 carries mass {D.instance_marginal[0]:.2f}")

    good = ErmPolicy("good_observed_labels")
    bad = ErmPolicy("bad", witness=GShatterWitness(tuple(range(d)), tuple(int(v) for v in f0)))
    for name, policy in (("good", good), ("bad", bad)):
        est = estimate_sample_complexity(policy, H, D, eps, delta, trials=trials, seed=7)
        print(f"  {name:>4} ERM: estimated sample complexity m_hat = {est.m_hat}")

    m = math.ceil(math.log(1 / delta) / eps)
    exact = exact_unsampled_failure(D.instance_marginal, eps, m)
    print(f"  (1/eps) ln(1/delta) = {m}; the bad ERM still fails with probability {exact:.3f} there")


if __name__ == "__main__":
    main(*map(int, sys.argv[1:3]))
