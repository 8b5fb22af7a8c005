import itertools

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import small_classes
from mclearn.bandit import (BSOA, BatchOracle, ConstantGuesser, FirstConsistentGuesser, HiddenLabelingOracle,
                            MajorityGuesser, ReplayOracle, bandit_adversary, bandit_batch_learner, batch_sample_size,
                            bsoa_run, bsoa_step, max_bsoa_mistakes, online_pbi, run_bandit)
from mclearn.dimensions import SubclassDims, bandit_littlestone_dim, littlestone_dim, pbi_upper_bound
from mclearn.errors import ProtocolError
from mclearn.hypothesis import HypothesisClass, build_constant_class, build_full_class
from mclearn.learners import ErmPolicy


def test_bsoa_examples():
    single = HypothesisClass([[2, 0]], 3)
    assert bsoa_run(single, HiddenLabelingOracle([0, 1, 0], [2, 0, 2])).mistakes == 0
    consts = build_constant_class(3)
    for y in range(3):
        assert bsoa_run(consts, HiddenLabelingOracle([0] * 6, [y] * 6)).mistakes <= 2
    adv = bandit_adversary(consts, BSOA(consts))
    assert adv.mistakes == 2 == bandit_littlestone_dim(consts)[0]


def test_bandit_adversary_examples():
    assert bandit_adversary(build_constant_class(2), lambda x: 0).mistakes == 1
    res = bandit_adversary(HypothesisClass([[1]], 2), lambda x: 0)
    assert res.mistakes == 0 and res.transcript.rounds == []
    with pytest.raises(ProtocolError):
        bandit_adversary(build_constant_class(3), lambda x: 3)


def test_bsoa_rejects_inconsistent_oracle():
    consts = build_constant_class(2, d=2)
    with pytest.raises(ProtocolError):
        bsoa_run(consts, HiddenLabelingOracle([0, 1], [0, 1]))
    dims = SubclassDims(consts)
    with pytest.raises(ProtocolError):
        bsoa_step(dims, 0, 0)


@pytest.mark.parametrize("k", range(2, 7))
def test_constant_classes_pbi(k):
    H = build_constant_class(k)
    rep = online_pbi(H)
    assert (rep.bl_dim, rep.l_dim, rep.ratio) == (k - 1, 1, k - 1)
    assert rep.ratio <= pbi_upper_bound(k)
    assert max_bsoa_mistakes(H, 6) == min(k - 1, 6)


def test_pbi_singleton_undefined():
    rep = online_pbi(HypothesisClass([[0, 1]], 2))
    assert rep.ratio is None and rep.l_dim == 0


@given(small_classes(max_d=2, max_k=3, max_size=6))
@settings(max_examples=60, deadline=None)
def test_bandit_adversary_forces_bldim(H):
    dims = SubclassDims(H)
    bl = bandit_littlestone_dim(H, dims)[0]
    for cls in (BSOA, ConstantGuesser, MajorityGuesser, FirstConsistentGuesser):
        res = bandit_adversary(H, cls(H, dims))
        assert res.mistakes >= bl
        h = H.table[res.hypothesis]
        assert all(h[r.x] != r.guess for r in res.transcript.rounds)
    assert max_bsoa_mistakes(H, 6, dims=dims) <= bl
    if H.k >= 2 and littlestone_dim(H, dims)[0] >= 1:
        assert online_pbi(H, dims).ratio <= pbi_upper_bound(H.k)


@given(small_classes(max_d=2, max_k=3, max_size=6))
@settings(max_examples=60, deadline=None)
def test_unfiltered_bsoa_bound_empirically(H):
    # the variant that ignores correct guesses; checked over every adaptive oracle up to horizon 6
    bl = bandit_littlestone_dim(H)[0]
    assert max_bsoa_mistakes(H, 6, filter_correct=False) <= bl


def test_bsoa_dp_matches_hidden_labeling_enumeration():
    H = HypothesisClass([[0, 1], [1, 2], [2, 2], [0, 0]], 3)
    dims = SubclassDims(H)
    brute = 0
    for h in H.table.tolist():
        for xs in itertools.product(range(2), repeat=4):
            brute = max(brute, bsoa_run(H, HiddenLabelingOracle.from_hypothesis(h, xs), dims=dims).mistakes)
    assert brute <= max_bsoa_mistakes(H, 4, dims=dims) <= bandit_littlestone_dim(H, dims)[0]


def test_replay_oracle_round_trip(tmp_path):
    H = build_constant_class(4)
    res = bandit_adversary(H, BSOA(H))
    xs = [r.x for r in res.transcript.rounds]
    oracle = HiddenLabelingOracle.from_hypothesis(H.table[res.hypothesis], xs)
    path = tmp_path / "replay.jsonl"
    oracle.save(path)
    replay = ReplayOracle(path)
    assert replay.labels == oracle.labels
    assert bsoa_run(H, replay).mistakes == res.mistakes == 3


def test_replay_oracle_bad_line(tmp_path):
    path = tmp_path / "r.jsonl"
    path.write_text('{"x": 0}\n')
    with pytest.raises(ValueError, match=":1"):
        ReplayOracle(path)


def test_batch_learner_k1_is_full_information():
    H = HypothesisClass([[0, 0, 0]], 1)
    res = bandit_batch_learner(H, [0, 2, 1, 2], BatchOracle([0, 0, 0, 0]), ErmPolicy(), seed=4)
    assert res.sample.tolist() == [[0, 0], [2, 0], [1, 0], [2, 0]]
    assert res.index == 0


def test_batch_learner_filters_confirmed_pairs():
    H = build_full_class(2, 3)
    labels = [2, 1, 0, 2, 1]
    res = bandit_batch_learner(H, [0, 1, 0, 1, 0], BatchOracle(labels), ErmPolicy(), seed=1)
    keep = res.guesses == np.array(labels)
    assert res.sample[:, 1].tolist() == res.guesses[keep].tolist()
    empty = bandit_batch_learner(H, [], BatchOracle([]), ErmPolicy(), seed=1)
    assert empty.sample.shape == (0, 2)


def test_batch_sample_size():
    assert batch_sample_size(2, 10, 0.2) == int(np.ceil(60 + 1.5 * np.log(10)))
    with pytest.raises(ValueError):
        batch_sample_size(2, 10, 1.0)


def test_transcript_jsonl():
    H = build_constant_class(3)
    tr = bandit_adversary(H, BSOA(H)).transcript
    lines = tr.to_jsonl().splitlines()
    assert len(lines) == 2 and '"correct": false' in lines[0]
    assert run_bandit(H, BSOA(H), HiddenLabelingOracle([0], [1])).mistakes == 1
