"""Mistake bounds in the online model.

SOA makes at most Littlestone-dimension many mistakes on any realizable
sequence, and walking a shattered tree forces exactly that many. On noisy
sequences, exponential weights over SOA imitators keeps the regret small.

    python3 demos/online_learning.py
"""

import numpy as np

from mclearn import SOA, agnostic_online_run, build_full_class, littlestone_dim, realizable_adversary
from mclearn.online import MajorityLearner


def main() -> None:
    H = build_full_class(3, 2)
    ld, tree = littlestone_dim(H)
    print(f"full class [2]^[3]: Littlestone dimension {ld} (tree depth {tree.depth})")
    for learner in (SOA(H), MajorityLearner(H)):
        res = realizable_adversary(H, learner)
        print(f"  adversary vs {learner.name:>8}: {res.mistakes} mistakes, sequence {res.sequence}")

    H2 = build_full_class(2, 2)
    rng = np.random.default_rng(1)
    seq = list(zip(rng.integers(0, 2, 24).tolist(), rng.integers(0, 2, 24).tolist()))
    losses = [agnostic_online_run(H2, seq, seed=s).loss for s in range(50)]
    rep = agnostic_online_run(H2, seq, seed=0)
    print(f"random labels, T=24 on [2]^[2]: best hypothesis loss {rep.min_hypothesis_loss}, "
          f"mean learner loss {np.mean(losses):.2f}, regret bound {rep.bound:.2f}")


if __name__ == "__main__":
    main()
