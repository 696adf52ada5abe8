import logging


class NoPythonDotEnvFilter(logging.Filter):
    def filter(self, record):
        return 'Python-dotenv' not in record.getMessage()


class NoAlembicMigrationFilter(logging.Filter):
    def filter(self, record):
        return 'Running upgrade' not in record.getMessage()


def get_logger(name: str = 'nodba') -> logging.Logger:
    for noisy in ('mlflow', 'alembic', 'urllib3'):
        logging.getLogger(noisy).setLevel(logging.WARNING)
    logging.basicConfig(format='%(asctime)s %(levelname)-8s %(message)s', level=logging.INFO)
    logger = logging.getLogger(name)

    if not logger.filters:
        logger.addFilter(NoPythonDotEnvFilter())
        logger.addFilter(NoAlembicMigrationFilter())

    return logger
