import io
import json
import tempfile
import unittest
from pathlib import Path
from unittest import mock

from nodba.agent import CemConfig, cem_train, save_policy
from nodba.cli import main
from nodba.environment import EnvConfig, reward_fn
from nodba.workload import GeneratorProfile
from tests.unit.builders import FakeDatabase, fixture_workload, lineitem_catalog

CONF_DIR = Path(__file__).resolve().parents[2] / 'conf' / 'pipeline_configs'


def run_cli(*argv):
    with mock.patch('sys.stdout', new_callable=io.StringIO) as out:
        code = main([str(a) for a in argv])
    return code, out.getvalue()


class CliTest(unittest.TestCase):

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)

    def _policy(self) -> Path:
        path = self.tmp / 'policy.json'
        result = cem_train(EnvConfig(k=3, n_fixed=5), lineitem_catalog(), GeneratorProfile(),
                           CemConfig(population=6, iterations=2, episodes_per_eval=1, seed=1))
        save_policy(result, path)
        return path

    def test_usage_errors(self):
        assert run_cli()[0] == 2
        assert run_cli('shuffle')[0] == 2
        assert run_cli('gen-workload', '--queries', 0)[0] == 2
        assert run_cli('gen-workload')[0] == 2
        assert run_cli('train', '--k', 20)[0] == 2
        assert run_cli('oracle', '--workload', self.tmp / 'missing.json')[0] == 2

    def test_gen_workload_is_deterministic(self):
        first, second = self.tmp / 'a.json', self.tmp / 'b.json'
        code, out = run_cli('gen-workload', '--queries', 5, '--seed', 42, '--out', first)
        run_cli('gen-workload', '--queries', 5, '--seed', 42, '--out', second)

        assert code == 0
        assert json.loads(out) == {'out': str(first), 'queries': 5, 'seed': 42}
        assert first.read_bytes() == second.read_bytes()

    def test_gen_workload_reports_drawn_seed(self):
        out_file = self.tmp / 'w.json'
        code, out = run_cli('gen-workload', '--queries', 3, '--out', out_file)
        seed = json.loads(out)['seed']

        assert code == 0
        run_cli('gen-workload', '--queries', 3, '--seed', seed, '--out', self.tmp / 'again.json')
        assert out_file.read_bytes() == (self.tmp / 'again.json').read_bytes()

    def test_train_twice_gives_identical_policy(self):
        outputs = []
        for name in ('p1', 'p2'):
            policy = self.tmp / f'{name}.json'
            code, out = run_cli('train', '--seed', 7, '--population', 4, '--iterations', 2, '--episodes', 1,
                                '--out', policy, '--history', self.tmp / f'{name}.csv', '--no-evaluate')
            assert code == 0
            assert json.loads(out)['seed'] == 7
            outputs.append(policy.read_bytes())

        assert outputs[0] == outputs[1]

    def test_train_with_evaluation(self):
        code, out = run_cli('train', '--population', 4, '--iterations', 1, '--episodes', 1, '--threads', 2,
                            '--out', self.tmp / 'p.json', '--history', self.tmp / 'h.csv')
        result = json.loads(out)

        assert code == 0
        assert result['w1_regret'] >= 1.0
        assert Path(result['history']).exists()

    def test_recommend(self):
        code, out = run_cli('recommend', '--policy', self._policy(), '--workload', 'w1.json')
        result = json.loads(out)

        assert code == 0
        assert len(result['indexes']) <= 3
        assert set(result['indexes']) <= set(fixture_workload('w1.json').used_columns())
        assert result['reward'] == reward_fn(result['cost_no_index'], result['cost_configured'])
        assert result['latency_ms'] >= 0

    def test_evaluate(self):
        code, out = run_cli('evaluate', '--workload', 'w1.json', '--indexes', 'l_orderkey,l_partkey',
                            '--format', 'json')
        report = json.loads(out)

        assert code == 0
        assert len(report['queries']) == 5
        assert report['totals']['configured'] == sum(q['configured'] for q in report['queries'])
        assert report['totals']['configured'] < report['totals']['no_index']

    def test_evaluate_policy_to_file(self):
        target = self.tmp / 'report.csv'
        code, out = run_cli('evaluate', '--workload', 'w1.json', '--policy', self._policy(), '--out', target)

        assert code == 0
        assert target.read_text() == out
        assert out.splitlines()[0] == 'query,no_index,indexed_all,configured'

    def test_evaluate_usage_errors(self):
        assert run_cli('evaluate', '--workload', 'w1.json', '--indexes', 'l_nope')[0] == 2
        assert run_cli('evaluate', '--workload', 'w1.json')[0] == 2
        assert run_cli('evaluate', '--workload', 'w1.json', '--indexes', 'l_partkey',
                       '--policy', self._policy())[0] == 2

    def test_oracle(self):
        code, out = run_cli('oracle', '--workload', 'w1.json', '--k', 0)

        assert code == 0
        assert json.loads(out) == {'columns': [], 'cost': 5 * 6001215, 'configs_evaluated': 1}

    def test_oracle_from_conf_file_with_regret(self):
        code, out = run_cli('oracle', '--conf-file', CONF_DIR / 'oracle.yml', '--regret', self._policy())
        result = json.loads(out)

        assert code == 0
        assert 1 <= len(result['columns']) <= 3
        assert result['policy']['regret'] >= 1.0
        assert result['policy']['cost'] >= result['cost']

    def test_dbms_without_url_fails(self):
        assert run_cli('oracle', '--workload', 'w1.json', '--cost', 'dbms')[0] == 1

    def test_negative_seed(self):
        assert run_cli('gen-workload', '--queries', 3, '--seed', -1, '--out', self.tmp / 'w.json')[0] == 2
        assert run_cli('train', '--seed', -1, '--iterations', 1, '--out', self.tmp / 'p.json')[0] == 2
        assert not (self.tmp / 'w.json').exists()
        assert not (self.tmp / 'p.json').exists()

    def test_negative_seed_from_conf_file(self):
        conf = self.tmp / 'gen.yml'
        conf.write_text(f'queries: 3\nseed: -1\nout: {self.tmp / "w.json"}\n')

        assert run_cli('gen-workload', '--conf-file', conf)[0] == 2
        assert not (self.tmp / 'w.json').exists()

    def test_recommend_with_dbms_encodes_measured_selectivities(self):
        db = FakeDatabase(row_count=6001215, matching_rows=6001215 // 4)
        with mock.patch('nodba.dbms_connector.psycopg2.connect', return_value=db.connection()):
            code, out = run_cli('recommend', '--policy', self._policy(), '--workload', 'w1.json', '--cost', 'dbms',
                                '--db-url', 'postgresql://db/tpch')

        predicates = {(p.column, p.op, repr(p.value)) for q in fixture_workload('w1.json').queries
                      for p in q.predicates}
        counted = db.executed('SELECT count(*) FROM "lineitem" WHERE')
        assert code == 0
        assert len(counted) == len(predicates)
        assert all(' AND ' not in statement for statement in counted)
        assert json.loads(out)['cost_configured'] <= json.loads(out)['cost_no_index']
