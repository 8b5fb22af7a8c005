"""Exact, desk-scale tools for multiclass learnability of finite hypothesis classes."""

from .bandit import BSOA, bandit_adversary, bandit_batch_learner, bsoa_run, online_pbi
from .dimensions import (GShatterWitness, NShatterWitness, ShatteredTree, SubclassDims,
                         bandit_littlestone_dim, graph_dim, littlestone_dim, natarajan_dim, vc_dim)
from .errors import Budget, BudgetError, InvariantError, ProtocolError, get_budget, set_budget
from .hypothesis import (FormatError, HypothesisClass, build_cantor_class, build_constant_class, cantor_hypothesis,
                         build_full_class, is_symmetric, load_hclass, relabel, restrict, save_hclass,
                         symmetrize)
from .learners import (ErmPolicy, double_sampling_bound, erm_bad, erm_generic, erm_good_observed_labels,
                       erm_symmetric, essential_range, growth_function, restricted_range_bound)
from .online import SOA, agnostic_online_run, build_agnostic_experts, lea_run, realizable_adversary, soa_run
from .pac_sim import (DiscreteDistribution, approximation_error, badlb_distribution, draw_sample,
                      estimate_sample_complexity, exact_unsampled_failure, random_bijection_experiment, true_error,
                      wilson_interval)

__version__ = "0.1.0"
