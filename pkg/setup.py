# Always prefer setuptools over distutils
from setuptools import setup, find_packages
# To use a consistent encoding
from codecs import open
from os import path

here = path.abspath(path.dirname(__file__))

# Get the long description from the README file
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()


def read_requirements(name):
    with open(path.join(here, name), encoding='utf-8') as f:
        lines = [line.split('#')[0].strip() for line in f]

    return [line for line in lines if line and not line.startswith('-r')]


setup(
    name='hallcal',
    version='0.1.0',
    description='Surrogate-assisted calibration of server air-flow rates in data-hall thermal models',
    long_description=long_description,
    long_description_content_type='text/markdown',
    keywords='data center thermal model calibration surrogate',
    packages=find_packages(exclude=['examples', 'examples.*']),
    python_requires='>=3.8',
    install_requires=read_requirements('requirements.txt'),
    extras_require={
        'dev': read_requirements('requirements-dev.txt'),
    },
    package_data={
        'hallcal.components': ['*.yaml'],
        'hallcal.components.tests': ['test_provider/*.yaml'],
    },
    entry_points={
        'console_scripts': [
            'hallcal=hallcal.cli.main:main',
        ],
    },
)
