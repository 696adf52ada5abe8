"""
Cross-entropy-method agent for the index-selection environment.

Each iteration samples a population of parameter vectors from a diagonal Gaussian, scores every candidate with
greedy rollouts on one shared workload batch, and refits the Gaussian to the elite fraction. Candidate noise and
workload batches come from streams derived from (seed, iteration, slot), and elites are ranked on the full ordered
fitness list, so results do not depend on how candidates are scheduled across threads.
The returned policy is the best one seen on a fixed held-out workload batch, or by batch fitness when that batch is
disabled.
"""
import json
import math
import pathlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from nodba.catalog import Catalog
from nodba.cost_model import LIVE, AnalyticCostProvider, CostProvider, IndexConfig
from nodba.environment import EnvConfig, IndexSelectionEnv, Transition
from nodba.errors import ArchMismatchError, ConfigError, PolicyParseError
from nodba.policy_network import (GREEDY, NetArch, PolicyParams, forward, params_from_dict, params_to_dict,
                                  select_action)
from nodba.utils.logger_utils import get_logger
from nodba.utils.seeding import CANDIDATE_STREAM, VALIDATION_STREAM, WORKLOAD_STREAM, derive_rng, derive_seed
from nodba.workload import GeneratorProfile, SelectivityFn, Workload, generate_workload

_logger = get_logger()

POLICY_FILE_VERSION = 1


@dataclass
class CemConfig:
    """
    Attributes:
        population (int): Candidates sampled per iteration
        elite_fraction (float): Fraction of the population kept to refit the sampling distribution
        iterations (int): Number of CEM iterations
        episodes_per_eval (int): Workloads in each iteration's shared evaluation batch
        init_std (float): Initial per-parameter standard deviation (the mean starts at zero)
        extra_noise_initial (float): Additive variance at iteration 0, decaying linearly to 0 at the last iteration
        seed (int): Root seed of every random stream used in training
        queries_per_workload (int): Queries per generated training workload. None means the environment's n_fixed
        validation_episodes (int): Size of a fixed held-out workload batch. Each iteration scores the top candidate
            and the refit mean on it, and the best-ever policy is the one with the highest held-out return. 0 keeps
            the top candidate by batch fitness instead
    """
    population: int = 50
    elite_fraction: float = 0.2
    iterations: int = 100
    episodes_per_eval: int = 4
    init_std: float = 1.0
    extra_noise_initial: float = 1.0
    seed: int = 0
    queries_per_workload: Optional[int] = None
    validation_episodes: int = 16

    @property
    def n_elite(self) -> int:
        return max(1, math.ceil(self.elite_fraction * self.population))

    def validate(self) -> None:
        if not 0.0 < self.elite_fraction <= 1.0:
            raise ConfigError(f'elite_fraction must lie in (0, 1], got {self.elite_fraction}')
        for name in ('population', 'iterations', 'episodes_per_eval'):
            if getattr(self, name) < 1:
                raise ConfigError(f'{name} must be positive')
        if self.init_std <= 0:
            raise ConfigError('init_std must be positive')
        if self.extra_noise_initial < 0:
            raise ConfigError('extra_noise_initial must be non-negative')
        if self.queries_per_workload is not None and self.queries_per_workload < 1:
            raise ConfigError('queries_per_workload must be positive')
        if self.validation_episodes < 0:
            raise ConfigError('validation_episodes must be non-negative')


@dataclass
class IterationStats:
    iteration: int
    mean_return: float
    elite_mean_return: float
    best_return: float
    extra_noise: float


@dataclass
class RolloutResult:
    episode_return: float
    final_config: IndexConfig
    transitions: List[Transition]


@dataclass
class TrainResult:
    best_params: PolicyParams
    best_fitness: float
    history: List[IterationStats]
    cem_cfg: CemConfig
    env_cfg: EnvConfig

    def history_frame(self) -> pd.DataFrame:
        return pd.DataFrame.from_records([asdict(h) for h in self.history],
                                         columns=['iteration', 'mean_return', 'elite_mean_return', 'best_return',
                                                  'extra_noise'])

    def write_history(self, path: Union[str, pathlib.Path]) -> None:
        self.history_frame().to_csv(path, index=False)


def rollout(params: PolicyParams, env: IndexSelectionEnv, workload: Workload) -> RolloutResult:
    """
    One greedy, masked episode from the empty configuration
    """
    state = env.reset(workload)
    transitions = []
    total = 0.0
    done = env.is_done(state)
    while not done:
        dist = forward(params, env.encode(state))
        action = select_action(dist, env.action_mask(state), mode=GREEDY)
        state, reward, done, transition = env.step(state, action)
        transitions.append(transition)
        total += reward

    return RolloutResult(episode_return=total, final_config=state.config, transitions=transitions)


def evaluate_params(params: PolicyParams, workload_batch: Sequence[Workload], env: IndexSelectionEnv) -> float:
    """
    Mean greedy episode return over the batch
    """
    if not workload_batch:
        raise ConfigError('Evaluation batch must not be empty')
    returns = [rollout(params, env, w).episode_return for w in workload_batch]

    return float(sum(returns) / len(returns))


def _training_batch(catalog: Catalog,
                    profile: GeneratorProfile,
                    cem_cfg: CemConfig,
                    n_queries: int,
                    iteration: int) -> List[Workload]:
    return [generate_workload(catalog, n_queries, profile, derive_seed(cem_cfg.seed, WORKLOAD_STREAM, iteration, slot))
            for slot in range(cem_cfg.episodes_per_eval)]


def _validation_batch(catalog: Catalog,
                      profile: GeneratorProfile,
                      cem_cfg: CemConfig,
                      n_queries: int) -> List[Workload]:
    return [generate_workload(catalog, n_queries, profile, derive_seed(cem_cfg.seed, VALIDATION_STREAM, slot))
            for slot in range(cem_cfg.validation_episodes)]


def cem_train(env_cfg: EnvConfig,
              catalog: Catalog,
              generator_profile: GeneratorProfile = None,
              cem_cfg: CemConfig = None,
              cost_provider: CostProvider = None,
              threads: int = 1,
              training_workloads: Sequence[Workload] = None,
              on_iteration: Callable[[IterationStats], None] = None) -> TrainResult:
    """
    Train a policy with the cross-entropy method

    Parameters
    ----------
    env_cfg : EnvConfig
        Index budget k and encoding height n_fixed
    catalog : Catalog
        Schema the policy acts on
    generator_profile : GeneratorProfile
        Shape of the random training workloads
    cem_cfg : CemConfig
        Population, elite fraction, iterations, noise schedule and seed
    cost_provider : CostProvider
        cost(L) source, analytic by default
    threads : int
        Worker threads evaluating candidates. Results are identical for every value
    training_workloads : list of Workload
        When given, every iteration evaluates candidates on exactly these workloads instead of generated batches
    on_iteration : callable
        Called with the IterationStats of every finished iteration

    Returns
    -------
    TrainResult
    """
    cem_cfg = cem_cfg or CemConfig()
    cem_cfg.validate()
    generator_profile = generator_profile or GeneratorProfile()
    cost_provider = cost_provider or AnalyticCostProvider()
    if threads < 1:
        raise ConfigError('threads must be positive')
    if cost_provider.capability == LIVE and threads > 1:
        raise ConfigError('A live cost provider holds one connection and cannot be used from several threads')

    env = IndexSelectionEnv(catalog, env_cfg, cost_provider)
    n_queries = cem_cfg.queries_per_workload or env_cfg.n_fixed
    if training_workloads is not None:
        training_workloads = list(training_workloads)
        if not training_workloads:
            raise ConfigError('training_workloads must not be empty')
    else:
        generator_profile.validate(catalog)

    validation = None
    if cem_cfg.validation_episodes:
        validation = training_workloads or _validation_batch(catalog, generator_profile, cem_cfg, n_queries)

    arch = NetArch.for_env(catalog.m, env_cfg.n_fixed)
    dim = arch.param_count
    mu = np.zeros(dim)
    sigma = np.full(dim, cem_cfg.init_std)
    n_elite = cem_cfg.n_elite
    _logger.info(f'CEM: {dim} parameters, population={cem_cfg.population}, elites={n_elite}, '
                 f'iterations={cem_cfg.iterations}, threads={threads}')

    best_theta, best_fitness = None, -math.inf
    history = []
    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for i in range(cem_cfg.iterations):
            batch = training_workloads or _training_batch(catalog, generator_profile, cem_cfg, n_queries, i)
            extra_noise = cem_cfg.extra_noise_initial * max(0.0, 1.0 - i / cem_cfg.iterations)
            std = np.sqrt(sigma ** 2 + extra_noise)
            thetas = np.stack([mu + std * derive_rng(cem_cfg.seed, CANDIDATE_STREAM, i, c).standard_normal(dim)
                               for c in range(cem_cfg.population)])

            def score(theta: np.ndarray) -> float:
                return evaluate_params(PolicyParams(arch, theta), batch, env)

            mapper = executor.map if executor is not None else map
            fitness = np.array(list(mapper(score, thetas)))

            # stable sort: equal fitness keeps candidate order
            order = np.argsort(-fitness, kind='stable')
            elites = thetas[order[:n_elite]]
            mu = elites.mean(axis=0)
            sigma = elites.std(axis=0)

            if validation is None:
                contenders = [(float(fitness[order[0]]), thetas[order[0]])]
            else:
                contenders = [(evaluate_params(PolicyParams(arch, theta), validation, env), theta)
                              for theta in (thetas[order[0]], mu)]
            for value, theta in contenders:
                if value > best_fitness:
                    best_fitness = value
                    best_theta = theta.copy()

            stats = IterationStats(iteration=i,
                                   mean_return=float(fitness.mean()),
                                   elite_mean_return=float(fitness[order[:n_elite]].mean()),
                                   best_return=best_fitness,
                                   extra_noise=extra_noise)
            history.append(stats)
            _logger.info(f'CEM iteration {i + 1}/{cem_cfg.iterations}: mean={stats.mean_return:.4f} '
                         f'elite={stats.elite_mean_return:.4f} best={stats.best_return:.4f}')
            if on_iteration is not None:
                on_iteration(stats)
    finally:
        if executor is not None:
            executor.shutdown()

    return TrainResult(best_params=PolicyParams(arch, best_theta),
                       best_fitness=best_fitness,
                       history=history,
                       cem_cfg=cem_cfg,
                       env_cfg=env_cfg)


def recommend(params: PolicyParams,
              workload: Workload,
              catalog: Catalog,
              env_cfg: EnvConfig = None,
              cost_provider: CostProvider = None,
              selectivity_fn: SelectivityFn = None) -> IndexConfig:
    """
    Final configuration of a greedy rollout: at most k indexes, all on columns the workload uses. selectivity_fn
    overrides the selectivities the policy sees, e.g. values measured on a live database
    """
    env = IndexSelectionEnv(catalog, env_cfg, cost_provider, selectivity_fn)

    return rollout(params, env, workload).final_config


def save_policy(result: TrainResult, path: Union[str, pathlib.Path]) -> None:
    document = {'version': POLICY_FILE_VERSION,
                **params_to_dict(result.best_params),
                'trained_with': asdict(result.cem_cfg),
                'env': asdict(result.env_cfg),
                'seed': result.cem_cfg.seed}
    pathlib.Path(path).write_text(json.dumps(document, indent=2) + '\n')


def read_policy_file(path: Union[str, pathlib.Path]) -> dict:
    try:
        document = json.loads(pathlib.Path(path).read_text())
    except json.JSONDecodeError as e:
        raise PolicyParseError(f'{path}: {e}') from e
    if not isinstance(document, dict):
        raise PolicyParseError(f'{path}: policy file must hold a JSON object')
    if document.get('version') != POLICY_FILE_VERSION:
        raise PolicyParseError(f'{path}: unsupported policy file version {document.get("version")!r}')

    return document


def policy_env_config(document: dict, default: EnvConfig = None) -> EnvConfig:
    """EnvConfig recorded in a policy file, or default when the file carries none"""
    env = document.get('env')
    if not env:
        return default or EnvConfig()
    return EnvConfig(k=int(env['k']), n_fixed=int(env['n_fixed']))


def load_policy(path: Union[str, pathlib.Path],
                catalog: Catalog = None,
                env_cfg: EnvConfig = None) -> PolicyParams:
    """
    Load a policy file. With a catalog, refuse policies whose input or output width does not fit
    (catalog.m, env_cfg.n_fixed)
    """
    params = params_from_dict(read_policy_file(path))
    if catalog is not None:
        env_cfg = env_cfg or EnvConfig()
        expected = NetArch.for_env(catalog.m, env_cfg.n_fixed)
        if (params.arch.input_dim, params.arch.output_dim) != (expected.input_dim, expected.output_dim):
            raise ArchMismatchError(
                f'Policy expects input {params.arch.input_dim} / output {params.arch.output_dim}, catalog '
                f'{catalog.table_name} with n_fixed={env_cfg.n_fixed} needs {expected.input_dim} / '
                f'{expected.output_dim}')

    return params
