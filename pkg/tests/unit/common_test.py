import os
import tempfile
import unittest
from pathlib import Path

import pytest

from nodba.common import Job, split_columns
from nodba.cost_model import AnalyticCostProvider
from nodba.environment import EnvConfig
from nodba.errors import ConfigError, UsageError


class EchoJob(Job):

    def launch(self):
        return self.conf


class JobTest(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def _write(self, name: str, text: str) -> str:
        path = Path(self.tmp.name) / name
        path.write_text(text)
        return str(path)

    def test_explicit_values_override_conf_file(self):
        conf_file = self._write('job.yml', 'k: 3\nseed: 1\nmlflow_params:\n  run_name: x\n')
        job = EchoJob(init_conf={'seed': 7, 'k': None}, conf_file=conf_file)

        assert job.launch() == {'k': 3, 'seed': 7, 'mlflow_params': {'run_name': 'x'}}

    def test_conf_file_problems(self):
        with pytest.raises(UsageError):
            EchoJob(conf_file=str(Path(self.tmp.name) / 'missing.yml'))
        with pytest.raises(UsageError):
            EchoJob(conf_file=self._write('list.yml', '- 1\n- 2\n'))
        assert EchoJob(conf_file=self._write('empty.yml', '')).conf == {}

    def test_env_file(self):
        self.addCleanup(os.environ.pop, 'NODBA_EXPERIMENT_PATH', None)
        env_file = self._write('.env', 'NODBA_EXPERIMENT_PATH=/Shared/nodba\n')
        job = EchoJob(env_file=env_file)

        assert job.env_vars['NODBA_EXPERIMENT_PATH'] == '/Shared/nodba'

    def test_catalog(self):
        assert EchoJob().get_catalog().table_name == 'lineitem'
        with pytest.raises(UsageError):
            EchoJob(init_conf={'catalog': str(Path(self.tmp.name) / 'nope.json')}).get_catalog()

    def test_require(self):
        with pytest.raises(UsageError) as e:
            EchoJob().require('n_fixed')

        assert '--n-fixed' in str(e.value)

    def test_bundled_workload_by_name(self):
        job = EchoJob(init_conf={'workload': 'w1.json'})

        assert job.get_workload(job.get_catalog()).n == 5

    def test_env_cfg(self):
        catalog = EchoJob().get_catalog()

        assert EchoJob(init_conf={'k': 4}).get_env_cfg(catalog) == EnvConfig(k=4, n_fixed=5)
        assert EchoJob().get_env_cfg(catalog, default=EnvConfig(k=2, n_fixed=3)) == EnvConfig(k=2, n_fixed=3)
        with pytest.raises(UsageError):
            EchoJob(init_conf={'k': 20}).get_env_cfg(catalog)

    def test_generator_profile(self):
        profile = EchoJob(init_conf={'columns': 'l_orderkey, l_partkey', 'min_predicates': 1}).get_generator_profile()

        assert profile.candidate_columns == ['l_orderkey', 'l_partkey']
        assert profile.min_predicates == 1
        assert profile.min_workload_columns is None
        assert EchoJob(init_conf={'min_workload_columns': '3'}).get_generator_profile().min_workload_columns == 3

    def test_seed(self):
        assert EchoJob(init_conf={'seed': '7'}).get_seed() == 7
        assert EchoJob().get_seed() is None
        assert EchoJob().get_seed(default=0) == 0
        for bad in (-1, '-1', 'seven', True, 1.5):
            with pytest.raises(UsageError):
                EchoJob(init_conf={'seed': bad}).get_seed()

    def test_cost_provider(self):
        with EchoJob(init_conf={'fetch_penalty': 1.5}).cost_provider() as provider:
            assert isinstance(provider, AnalyticCostProvider)
            assert provider.fetch_penalty == 1.5

        with pytest.raises(UsageError):
            EchoJob(init_conf={'cost': 'oracle'}).cost_kind()
        with pytest.raises(ConfigError):
            with EchoJob(init_conf={'cost': 'dbms'}).cost_provider():
                pass


class SplitColumnsTest(unittest.TestCase):

    def test_split(self):
        assert split_columns('a,b, c') == ['a', 'b', 'c']
        assert split_columns(['a', 'b']) == ['a', 'b']
        assert split_columns('') is None
        assert split_columns(None) is None
