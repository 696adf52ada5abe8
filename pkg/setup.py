from setuptools import find_packages, setup
from nodba import __version__

setup(
    name='nodba',
    packages=find_packages(exclude=['tests', 'tests.*']),
    package_data={'nodba': ['fixtures/*.json']},
    setup_requires=['wheel'],
    install_requires=[
        'numpy',
        'pandas',
        'pyyaml',
        'python-dotenv',
        'mlflow',
        'psycopg2-binary',
    ],
    entry_points={'console_scripts': ['nodba = nodba.cli:main']},
    python_requires='>=3.9',
    version=__version__,
    description='Learned index advisor: a softmax policy trained with the cross-entropy method picks single-column '
                'indexes for conjunctive selection workloads',
)
