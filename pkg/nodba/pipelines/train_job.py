from typing import Optional

from nodba.agent import CemConfig
from nodba.common import Job, MLflowTrackingConfig
from nodba.policy_train import PolicyTrain, PolicyTrainConfig
from nodba.utils.logger_utils import get_logger

_logger = get_logger()

DEFAULT_RUN_NAME = 'nodba_cem'


class TrainJob(Job):

    def _get_mlflow_tracking_cfg(self) -> Optional[MLflowTrackingConfig]:
        experiment_id = self.conf.get('experiment_id', self.env_vars.get('NODBA_EXPERIMENT_ID'))
        experiment_path = self.conf.get('experiment_path', self.env_vars.get('NODBA_EXPERIMENT_PATH'))
        if experiment_id is None and experiment_path is None:
            _logger.info('No MLflow experiment configured, training run is not tracked')
            return None
        run_name = self.conf.get('mlflow_params', {}).get('run_name', DEFAULT_RUN_NAME)

        return MLflowTrackingConfig(run_name=run_name, experiment_id=experiment_id, experiment_path=experiment_path)

    def _get_cem_cfg(self) -> CemConfig:
        defaults = CemConfig()
        queries = self.conf.get('queries_per_workload')
        return CemConfig(population=int(self.conf.get('population', defaults.population)),
                         elite_fraction=float(self.conf.get('elite_frac', defaults.elite_fraction)),
                         iterations=int(self.conf.get('iterations', defaults.iterations)),
                         episodes_per_eval=int(self.conf.get('episodes', defaults.episodes_per_eval)),
                         init_std=float(self.conf.get('init_std', defaults.init_std)),
                         extra_noise_initial=float(self.conf.get('extra_noise', defaults.extra_noise_initial)),
                         seed=self.get_seed(defaults.seed),
                         queries_per_workload=int(queries) if queries is not None else None,
                         validation_episodes=int(self.conf.get('validation_episodes', defaults.validation_episodes)))

    def launch(self) -> dict:
        _logger.info('Launching TrainJob job')
        catalog = self.get_catalog()
        cfg = PolicyTrainConfig(env_cfg=self.get_env_cfg(catalog),
                                cem_cfg=self._get_cem_cfg(),
                                generator_profile=self.get_generator_profile(),
                                policy_path=self.conf.get('out', 'policy.json'),
                                history_path=self.conf.get('history', 'history.csv'),
                                threads=int(self.conf.get('threads', 1)),
                                evaluate_fixtures=bool(self.conf.get('evaluate', True)),
                                mlflow_tracking_cfg=self._get_mlflow_tracking_cfg(),
                                conf=self.conf)
        with self.cost_provider() as provider:
            output = PolicyTrain(cfg, catalog, provider).run()
        _logger.info('TrainJob job finished!')

        return {'policy': str(cfg.policy_path),
                'history': str(cfg.history_path),
                'seed': cfg.cem_cfg.seed,
                **output.metrics}
