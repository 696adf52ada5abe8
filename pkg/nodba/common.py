"""
Module containing common data classes used throughout different pipelines, in addition to the Job class which is
extended to run the nodba subcommands.
"""
import contextlib
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Tuple

from nodba.agent import load_policy, policy_env_config, read_policy_file
from nodba.catalog import Catalog, load_catalog
from nodba.cost_model import ANALYTIC, AnalyticCostProvider, CostProvider, DEFAULT_FETCH_PENALTY
from nodba.dbms_connector import DbConnection, DbConnectionConfig, LiveCostProvider
from nodba.environment import EnvConfig
from nodba.errors import ConfigError, UsageError
from nodba.policy_network import PolicyParams
from nodba.utils.config_utils import load_and_set_env_vars, load_config, resolve_path
from nodba.utils.logger_utils import get_logger
from nodba.utils.seeding import check_seed
from nodba.workload import GeneratorProfile, Workload, parse_workload, validate_workload

DBMS = 'dbms'
COST_CHOICES = (ANALYTIC, DBMS)
DEFAULT_CATALOG = 'lineitem_sf1.json'
ENV_VAR_PREFIX = 'NODBA_'


@dataclass
class MLflowTrackingConfig:
    """
    Configuration data class used to unpack MLflow parameters during a policy training run.

    Attributes:
        run_name (str)
            Name of MLflow run
        experiment_id (str)
            ID of the MLflow experiment to be activated. If an experiment with this ID does not exist, raise an exception.
        experiment_path (str)
            Case sensitive name of the experiment to be activated. If an experiment with this name does not exist,
            a new experiment wth this name is created.
    """
    run_name: str
    experiment_id: str = None
    experiment_path: str = None


def split_columns(value) -> Optional[List[str]]:
    """'a,b, c' or ['a', 'b'] to a list of names; None and '' give None"""
    if value is None:
        return None
    if isinstance(value, str):
        names = [v.strip() for v in value.split(',') if v.strip()]
        return names or None
    return [str(v) for v in value]


class Job(ABC):
    """
    This is an abstract class that provides handy interfaces to implement the nodba subcommands.
    Create a child from this class and implement the abstract launch method.
    Class provides access to the following useful objects:
    * self.logger provides access to the nodba logger
    * self.conf provides access to the merged configuration of the job: values from the YAML conf file, overridden
      by every explicitly passed (not None) value of init_conf
    * self.env_vars provides access to the environment variables, after loading the optional dotenv file
    """
    def __init__(self, init_conf: Dict[str, Any] = None, conf_file: str = None, env_file: str = None):
        self.logger = get_logger()
        self.conf = self._provide_config(init_conf, conf_file)
        self._log_conf()
        self.env_vars = load_and_set_env_vars(env_file or self.conf.get('env'))
        self._log_env_vars()

    def _provide_config(self, init_conf: Optional[Dict[str, Any]], conf_file: Optional[str]) -> Dict[str, Any]:
        conf = {}
        if conf_file:
            self.logger.info(f'Conf file was provided, reading configuration from {conf_file}')
            try:
                conf = load_config(conf_file)
            except FileNotFoundError as e:
                raise UsageError(f'Conf file not found: {conf_file}') from e
            if not isinstance(conf, dict):
                raise UsageError(f'Conf file {conf_file} must hold a mapping')
        for key, value in (init_conf or {}).items():
            if value is not None:
                conf[key] = value

        return conf

    def _log_conf(self):
        self.logger.info(f'Launching {self.__class__.__name__} with configuration parameters:')
        for key, item in self.conf.items():
            self.logger.info('\t Parameter: %-30s with value => %-30s' % (key, item))

    def _log_env_vars(self):
        names = sorted(k for k in self.env_vars if k.startswith(ENV_VAR_PREFIX))
        if names:
            self.logger.info(f'nodba environment variables set: {", ".join(names)}')

    def get_catalog(self) -> Catalog:
        path = resolve_path(self.conf.get('catalog', DEFAULT_CATALOG))
        if not path.exists():
            raise UsageError(f'Catalog file not found: {path}')
        return load_catalog(path)

    def require(self, key: str):
        value = self.conf.get(key)
        if value is None:
            raise UsageError(f'Missing required option --{key.replace("_", "-")}')
        return value

    def input_path(self, key: str):
        path = resolve_path(self.require(key))
        if not path.exists():
            raise UsageError(f'File not found: {path}')
        return path

    def get_seed(self, default: Optional[int] = None) -> Optional[int]:
        seed = self.conf.get('seed', default)
        if seed is None:
            return None
        try:
            return check_seed(int(seed) if isinstance(seed, str) else seed)
        except ValueError as e:
            raise UsageError(f'Invalid --seed: {e}') from e

    def get_env_cfg(self, catalog: Catalog, default: EnvConfig = None) -> EnvConfig:
        default = default or EnvConfig()
        env_cfg = EnvConfig(k=int(self.conf.get('k', default.k)),
                            n_fixed=int(self.conf.get('n_fixed', default.n_fixed)))
        try:
            env_cfg.validate(catalog.m)
        except ConfigError as e:
            raise UsageError(str(e)) from e

        return env_cfg

    def get_workload(self, catalog: Catalog) -> Workload:
        workload = parse_workload(self.input_path('workload'))
        validate_workload(workload, catalog)
        return workload

    def get_policy(self, catalog: Catalog, key: str = 'policy') -> Tuple[PolicyParams, EnvConfig]:
        """
        Policy parameters plus the environment config to run them with: the one recorded in the policy file, with
        k overridden by an explicit --k
        """
        path = self.input_path(key)
        recorded = policy_env_config(read_policy_file(path))
        env_cfg = self.get_env_cfg(catalog, default=recorded)
        return load_policy(path, catalog, env_cfg), env_cfg

    def get_generator_profile(self) -> GeneratorProfile:
        defaults = GeneratorProfile()
        subset = self.conf.get('min_workload_columns')
        return GeneratorProfile(candidate_columns=split_columns(self.conf.get('columns')),
                                min_predicates=int(self.conf.get('min_predicates', defaults.min_predicates)),
                                max_predicates=int(self.conf.get('max_predicates', defaults.max_predicates)),
                                eq_probability=float(self.conf.get('eq_probability', defaults.eq_probability)),
                                min_workload_columns=int(subset) if subset is not None else None)

    def cost_kind(self) -> str:
        kind = self.conf.get('cost', ANALYTIC)
        if kind not in COST_CHOICES:
            raise UsageError(f'--cost must be one of {COST_CHOICES}, got {kind!r}')
        return kind

    @contextlib.contextmanager
    def cost_provider(self) -> Iterator[CostProvider]:
        """
        Analytic provider by default; with cost=dbms a live connection that is closed when the block exits
        """
        if self.cost_kind() == ANALYTIC:
            yield AnalyticCostProvider(float(self.conf.get('fetch_penalty', DEFAULT_FETCH_PENALTY)))
            return

        db_cfg = DbConnectionConfig(url=self.conf.get('db_url'),
                                    statement_timeout_s=int(self.conf.get('statement_timeout_s', 60)))
        with DbConnection(db_cfg) as connection:
            yield LiveCostProvider(connection)

    @abstractmethod
    def launch(self):
        """
        Main method of the job. Returns the job's machine-readable result.
        :return:
        """
        pass
