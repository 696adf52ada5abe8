"""
Episodic index-selection environment. An episode starts with no indexes and adds one index per step until k indexes
exist or no useful column is left. States are immutable, so one environment object can serve many concurrent
episodes.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from nodba.catalog import Catalog
from nodba.cost_model import AnalyticCostProvider, CostProvider, IndexConfig
from nodba.errors import ConfigError, IllegalActionError, RewardDomainError, WorkloadTooLargeError
from nodba.workload import SelectivityFn, SelectivityMatrix, Workload, build_matrix


@dataclass(frozen=True)
class EnvConfig:
    """
    Attributes:
        k (int): Index budget, i.e. the maximum episode length
        n_fixed (int): Number of query rows in the encoded state. Shorter workloads are padded with all-ones rows
    """
    k: int = 3
    n_fixed: int = 5

    def validate(self, m: int) -> None:
        if not 1 <= self.k <= m:
            raise ConfigError(f'k must lie in [1, {m}], got {self.k}')
        if self.n_fixed < 1:
            raise ConfigError(f'n_fixed must be at least 1, got {self.n_fixed}')

    def state_dim(self, m: int) -> int:
        return self.n_fixed * m + m


@dataclass(frozen=True)
class Action:
    column: int


@dataclass(frozen=True, eq=False)
class EnvState:
    """
    Attributes:
        workload (Workload): Workload of the episode
        matrix (SelectivityMatrix): Its selectivity matrix, frozen for the episode
        config (IndexConfig): Current configuration L
        steps_taken (int): Indexes created so far
        baseline_cost (float): cost({}) of the workload, computed once at reset
    """
    workload: Workload
    matrix: SelectivityMatrix
    config: IndexConfig
    steps_taken: int
    baseline_cost: float


@dataclass(frozen=True)
class Transition:
    """(L_{i-1}, a, L_i, r)"""
    prev_config: IndexConfig
    action: Action
    next_config: IndexConfig
    reward: float


def reward_fn(cost_empty: float, cost_l: float) -> float:
    """
    r(L) = max(cost({}) / cost(L) - 1, 0)
    """
    if cost_l <= 0:
        raise RewardDomainError(f'cost(L) must be positive, got {cost_l}')
    if cost_empty < 0:
        raise RewardDomainError(f'cost({{}}) must be non-negative, got {cost_empty}')

    return max(cost_empty / cost_l - 1.0, 0.0)


class IndexSelectionEnv:
    """
    Environment over one catalog. The cost provider is only read, never mutated.

    selectivity_fn fills the encoded selectivity matrix and defaults to the cost provider's own selectivities, so
    a live provider encodes measured values
    """
    def __init__(self,
                 catalog: Catalog,
                 env_cfg: EnvConfig = None,
                 cost_provider: CostProvider = None,
                 selectivity_fn: SelectivityFn = None):
        self.catalog = catalog
        self.cfg = env_cfg or EnvConfig()
        self.cfg.validate(catalog.m)
        self.cost_provider = cost_provider or AnalyticCostProvider()
        self.selectivity_fn = selectivity_fn or self.cost_provider.predicate_selectivity

    @property
    def state_dim(self) -> int:
        return self.cfg.state_dim(self.catalog.m)

    @property
    def n_actions(self) -> int:
        return self.catalog.m

    def reset(self, workload: Workload) -> EnvState:
        if workload.n > self.cfg.n_fixed:
            raise WorkloadTooLargeError(f'Workload has {workload.n} queries, the encoding holds {self.cfg.n_fixed}')
        matrix = build_matrix(workload, self.catalog, self.selectivity_fn)
        config = IndexConfig.empty(self.catalog.m, self.cfg.k)
        baseline = self.cost_provider.workload_cost(workload, config, self.catalog)

        return EnvState(workload=workload, matrix=matrix, config=config, steps_taken=0, baseline_cost=baseline)

    @staticmethod
    def has_index(state: EnvState) -> np.ndarray:
        """hasIndex(C_j) = 1 if C_j is indexed or no query of the workload uses it"""
        bits = np.asarray(state.config.bits, dtype=np.float64)
        unused = (~state.matrix.used_columns()).astype(np.float64)
        return np.maximum(bits, unused)

    def encode(self, state: EnvState) -> np.ndarray:
        padded = np.ones((self.cfg.n_fixed, self.catalog.m), dtype=np.float64)
        padded[:state.matrix.n] = state.matrix.values

        return np.concatenate([padded.ravel(), self.has_index(state)])

    def action_mask(self, state: EnvState) -> np.ndarray:
        return (self.has_index(state) == 0).astype(np.int8)

    def is_done(self, state: EnvState) -> bool:
        return state.steps_taken >= self.cfg.k or not self.action_mask(state).any()

    def step(self, state: EnvState, action: Action) -> Tuple[EnvState, float, bool, Transition]:
        j = action.column
        if not 0 <= j < self.catalog.m:
            raise IllegalActionError(f'Action column {j} outside [0, {self.catalog.m})')
        if state.steps_taken >= self.cfg.k:
            raise IllegalActionError('Episode already finished')
        if not self.action_mask(state)[j]:
            raise IllegalActionError(f'Column {self.catalog.columns[j].name} is masked (indexed or unused)')

        next_config = state.config.with_index(j)
        cost = self.cost_provider.workload_cost(state.workload, next_config, self.catalog)
        reward = reward_fn(state.baseline_cost, cost)
        next_state = EnvState(workload=state.workload,
                              matrix=state.matrix,
                              config=next_config,
                              steps_taken=state.steps_taken + 1,
                              baseline_cost=state.baseline_cost)
        transition = Transition(prev_config=state.config, action=action, next_config=next_config, reward=reward)

        return next_state, reward, self.is_done(next_state), transition
