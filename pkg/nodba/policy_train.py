import contextlib
import pathlib
import pprint
from dataclasses import dataclass, asdict, field
from typing import Any, Dict, List, Tuple

import mlflow
import pandas as pd

from nodba.agent import CemConfig, IterationStats, TrainResult, cem_train, recommend, save_policy
from nodba.catalog import Catalog
from nodba.common import MLflowTrackingConfig
from nodba.cost_model import AnalyticCostProvider, CostProvider
from nodba.environment import EnvConfig
from nodba.errors import ConfigError, NoDBAError
from nodba.utils.config_utils import fixture_path
from nodba.utils.evaluation_utils import RecommendationEvaluation
from nodba.utils.logger_utils import get_logger
from nodba.workload import GeneratorProfile, Workload, parse_workload, validate_workload

_logger = get_logger()

EVALUATION_FIXTURES = ('w1.json', 'w2.json', 'w3.json')


@dataclass
class PolicyTrainConfig:
    """
    Configuration data class used to execute the PolicyTrain pipeline.

    Attributes:
        env_cfg (EnvConfig)
            Index budget k and encoding height n_fixed
        cem_cfg (CemConfig)
            Population, elite fraction, iterations, noise schedule and seed
        generator_profile (GeneratorProfile)
            Shape of the random training workloads
        policy_path (str)
            Where the trained policy JSON is written
        history_path (str)
            Where the per-iteration history CSV is written
        threads (int)
            Worker threads for candidate evaluation
        evaluate_fixtures (bool)
            Score the trained policy on the bundled test workloads after training
        mlflow_tracking_cfg (MLflowTrackingConfig)
            [Optional] when set, the run is tracked to MLflow
        conf (dict):
            [Optional] dictionary of conf used to trigger the pipeline. If provided will be tracked as a yml
            file to MLflow tracking.
    """
    env_cfg: EnvConfig = field(default_factory=EnvConfig)
    cem_cfg: CemConfig = field(default_factory=CemConfig)
    generator_profile: GeneratorProfile = field(default_factory=GeneratorProfile)
    policy_path: str = 'policy.json'
    history_path: str = 'history.csv'
    threads: int = 1
    evaluate_fixtures: bool = True
    mlflow_tracking_cfg: MLflowTrackingConfig = None
    conf: Dict[str, Any] = None


@dataclass
class PolicyTrainOutput:
    train_result: TrainResult
    metrics: Dict[str, float]


class PolicyTrain:
    """
    Class to execute policy training. Params, per-iteration metrics, evaluation metrics and the policy artifacts are
    tracked to MLflow when a tracking config is given.
    """
    def __init__(self, cfg: PolicyTrainConfig, catalog: Catalog, cost_provider: CostProvider = None):
        self.cfg = cfg
        self.catalog = catalog
        self.cost_provider = cost_provider or AnalyticCostProvider()

    @staticmethod
    def _set_experiment(mlflow_tracking_cfg: MLflowTrackingConfig):
        """
        Set MLflow experiment. Use one of either experiment_id or experiment_path
        """
        if mlflow_tracking_cfg.experiment_id is not None:
            _logger.info(f'MLflow experiment_id: {mlflow_tracking_cfg.experiment_id}')
            mlflow.set_experiment(experiment_id=mlflow_tracking_cfg.experiment_id)
        elif mlflow_tracking_cfg.experiment_path is not None:
            _logger.info(f'MLflow experiment_path: {mlflow_tracking_cfg.experiment_path}')
            mlflow.set_experiment(experiment_name=mlflow_tracking_cfg.experiment_path)
        else:
            raise ConfigError('MLflow experiment_id or experiment_path must be set to track a training run')

    def _params(self) -> Dict[str, Any]:
        profile = self.cfg.generator_profile
        return {**{f'cem_{k}': v for k, v in asdict(self.cfg.cem_cfg).items()},
                **{f'env_{k}': v for k, v in asdict(self.cfg.env_cfg).items()},
                'catalog_table': self.catalog.table_name,
                'catalog_m': self.catalog.m,
                'candidate_columns': ','.join(profile.candidate_columns) if profile.candidate_columns else 'all',
                'cost_capability': self.cost_provider.capability,
                'threads': self.cfg.threads}

    def evaluation_workloads(self) -> List[Tuple[str, Workload]]:
        """
        Bundled test workloads that fit the catalog and the encoding height
        """
        workloads = []
        for name in EVALUATION_FIXTURES:
            workload = parse_workload(fixture_path(name))
            try:
                validate_workload(workload, self.catalog)
            except NoDBAError as e:
                _logger.info(f'Skipping evaluation on {name}: {e}')
                continue
            if workload.n > self.cfg.env_cfg.n_fixed:
                _logger.info(f'Skipping evaluation on {name}: {workload.n} queries exceed n_fixed')
                continue
            workloads.append((pathlib.Path(name).stem, workload))
        return workloads

    def evaluate(self, train_result: TrainResult) -> Dict[str, float]:
        """
        Recommendation quality of the trained policy on the bundled workloads, under the analytic cost model. The
        policy sees the selectivities of the training cost provider
        """
        evaluation = RecommendationEvaluation(AnalyticCostProvider())
        metrics = {}
        for stem, workload in self.evaluation_workloads():
            config = recommend(train_result.best_params, workload, self.catalog, self.cfg.env_cfg,
                               selectivity_fn=self.cost_provider.predicate_selectivity)
            metrics.update(evaluation.evaluate(config, workload, self.catalog, self.cfg.env_cfg.k,
                                               metric_prefix=f'{stem}_'))
            _logger.info(f'{stem}: recommended {config.names(self.catalog)}')
        return metrics

    def _on_iteration(self, tracked: bool):
        def log_iteration(stats: IterationStats):
            if tracked:
                mlflow.log_metrics({'mean_return': stats.mean_return,
                                    'elite_mean_return': stats.elite_mean_return,
                                    'best_return': stats.best_return,
                                    'extra_noise': stats.extra_noise},
                                   step=stats.iteration)
        return log_iteration

    def run(self) -> PolicyTrainOutput:
        """
        Method to trigger policy training, and tracking to MLflow.

        Steps:
            1. Set MLflow experiment and start a run (only when a tracking config is given)
            2. Train the policy with the cross-entropy method
            3. Write the policy JSON and the history CSV
            4. Evaluate the policy on the bundled test workloads
            5. Log metrics and artifacts to MLflow
        """
        _logger.info('==========Running policy training==========')
        mlflow_tracking_cfg = self.cfg.mlflow_tracking_cfg
        tracked = mlflow_tracking_cfg is not None

        if tracked:
            _logger.info('==========Setting MLflow experiment==========')
            self._set_experiment(mlflow_tracking_cfg)
            run_ctx = mlflow.start_run(run_name=mlflow_tracking_cfg.run_name)
        else:
            run_ctx = contextlib.nullcontext()

        with run_ctx:
            params = self._params()
            _logger.info(f'Training params: {pprint.pformat(params)}')
            if tracked:
                mlflow.log_params(params)
                if self.cfg.conf is not None:
                    mlflow.log_dict(self.cfg.conf, 'conf.yml')

            _logger.info('==========Training policy with CEM==========')
            train_result = cem_train(self.cfg.env_cfg,
                                     self.catalog,
                                     generator_profile=self.cfg.generator_profile,
                                     cem_cfg=self.cfg.cem_cfg,
                                     cost_provider=self.cost_provider,
                                     threads=self.cfg.threads,
                                     on_iteration=self._on_iteration(tracked))

            save_policy(train_result, self.cfg.policy_path)
            train_result.write_history(self.cfg.history_path)
            _logger.info(f'Policy written to {self.cfg.policy_path}, history to {self.cfg.history_path}')

            metrics = {'best_fitness': train_result.best_fitness}
            if self.cfg.evaluate_fixtures:
                _logger.info('==========Policy Evaluation==========')
                metrics.update(self.evaluate(train_result))
                _logger.info('Evaluation metrics:\n' + pd.Series(metrics, name='value').to_string())

            if tracked:
                mlflow.log_metrics(metrics)
                mlflow.log_artifact(str(self.cfg.policy_path))
                mlflow.log_artifact(str(self.cfg.history_path))

        _logger.info('==========Policy training completed==========')

        return PolicyTrainOutput(train_result=train_result, metrics=metrics)
