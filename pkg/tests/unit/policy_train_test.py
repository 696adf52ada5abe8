import tempfile
import unittest
from pathlib import Path

import mlflow
import pandas as pd
import pytest

from nodba.agent import CemConfig, load_policy
from nodba.common import MLflowTrackingConfig
from nodba.environment import EnvConfig
from nodba.errors import ConfigError
from nodba.policy_train import PolicyTrain, PolicyTrainConfig
from nodba.workload import GeneratorProfile
from tests.unit.builders import lineitem_catalog, toy_catalog

EXPERIMENT = 'nodba_policy_train_test'


class PolicyTrainTest(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.catalog = lineitem_catalog()

    def _cfg(self, **overrides) -> PolicyTrainConfig:
        values = dict(env_cfg=EnvConfig(k=3, n_fixed=5),
                      cem_cfg=CemConfig(population=6, iterations=2, episodes_per_eval=1, seed=11),
                      generator_profile=GeneratorProfile(),
                      policy_path=str(Path(self.tmp.name) / 'policy.json'),
                      history_path=str(Path(self.tmp.name) / 'history.csv'))
        values.update(overrides)
        return PolicyTrainConfig(**values)

    def test_untracked_run(self):
        cfg = self._cfg()
        output = PolicyTrain(cfg, self.catalog).run()

        params = load_policy(cfg.policy_path, self.catalog, cfg.env_cfg)
        history = pd.read_csv(cfg.history_path)
        assert params.arch.input_dim == 96
        assert list(history['iteration']) == [0, 1]
        assert output.metrics['best_fitness'] == output.train_result.best_fitness
        for stem in ('w1', 'w2', 'w3'):
            assert output.metrics[f'{stem}_regret'] >= 1.0
            assert output.metrics[f'{stem}_cost_configured'] <= output.metrics[f'{stem}_cost_no_index']

    def test_tracked_run(self):
        cfg = self._cfg(mlflow_tracking_cfg=MLflowTrackingConfig(run_name='unit', experiment_path=EXPERIMENT),
                        conf={'k': 3, 'population': 6})
        output = PolicyTrain(cfg, self.catalog).run()

        runs = mlflow.search_runs(experiment_names=[EXPERIMENT])
        assert len(runs) >= 1
        latest = runs.iloc[0]
        assert latest['tags.mlflow.runName'] == 'unit'
        assert latest['params.cem_population'] == '6'
        assert latest['params.env_k'] == '3'
        assert latest['metrics.best_fitness'] == pytest.approx(output.metrics['best_fitness'])
        assert 'metrics.w1_regret' in runs.columns

    def test_skip_evaluation(self):
        output = PolicyTrain(self._cfg(evaluate_fixtures=False), self.catalog).run()

        assert list(output.metrics) == ['best_fitness']

    def test_tracking_needs_an_experiment(self):
        cfg = self._cfg(mlflow_tracking_cfg=MLflowTrackingConfig(run_name='unit'))

        with pytest.raises(ConfigError):
            PolicyTrain(cfg, self.catalog).run()

    def test_evaluation_workloads_must_fit(self):
        assert [stem for stem, _ in PolicyTrain(self._cfg(), self.catalog).evaluation_workloads()] == \
            ['w1', 'w2', 'w3']
        assert PolicyTrain(self._cfg(env_cfg=EnvConfig(k=3, n_fixed=3)), self.catalog).evaluation_workloads() == []
        assert PolicyTrain(self._cfg(env_cfg=EnvConfig(k=1, n_fixed=5)), toy_catalog()).evaluation_workloads() == []
