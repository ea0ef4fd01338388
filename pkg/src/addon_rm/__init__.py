"""Add-on discount revenue management: offline FPTAS, exact oracle, and UCB learning."""

from .demand import (DemandTable, Instance, LinearDemandParams, PriceGrid, ScenarioError,
                     bundled_scenario, load_scenario, save_scenario, tabulate)
from .fptas import (SubproblemGrid, fptas_solve, resolution_for_epsilon, solve_master_dp,
                    solve_subproblem_grid)
from .learner import (EpisodeSnapshot, LearnerState, begin_episode, record_observation,
                      run_learning, ucb_demand_table)
from .oracle import brute_force_solve, exact_policy_revenue
from .policy import Policy, PolicyError
from .sim import PeriodObservation, PeriodStreams, simulate_period

__version__ = "0.1.0"
