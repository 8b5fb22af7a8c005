"""What bandit feedback costs.

With only "right/wrong" feedback, guessing among k constants can take k-1
mistakes instead of 1. BSOA matches the bandit-Littlestone dimension, and the
batch reduction recovers a full-information sample by random guessing.

    python3 demos/bandit_feedback.py
"""

from mclearn import BSOA, bandit_adversary, build_constant_class, online_pbi
from mclearn.bandit import BatchOracle, bandit_batch_learner, batch_sample_size
from mclearn.learners import ErmPolicy
from mclearn.pac_sim import DiscreteDistribution, draw_sample


def main() -> None:
    for k in range(2, 7):
        H = build_constant_class(k)
        rep = online_pbi(H)
        forced = bandit_adversary(H, BSOA(H)).mistakes
        print(f"k={k} constants: L-Dim {rep.l_dim}, BL-Dim {rep.bl_dim}, adversary forces {forced} on BSOA")

    H = build_constant_class(5, d=3)
    D = DiscreteDistribution.from_entries(3, 5, [(0, 2, 0.5), (1, 2, 0.3), (2, 2, 0.2)])
    m = batch_sample_size(5, 3, 0.2)
    S = draw_sample(D, m, 4)
    res = bandit_batch_learner(H, S[:, 0], BatchOracle(S[:, 1]), ErmPolicy(), seed=4)
    print(f"batch reduction: {m} bandit rounds kept {len(res.sample)} confirmed pairs, "
          f"ERM output {res.fit.table.tolist()}")


if __name__ == "__main__":
    main()
