import os
import yaml

from hallcal.errors import DataError
from hallcal.tools.dicttools import dictmerge

from .provider import ComponentProvider

PACKAGE_DIR = os.path.dirname(os.path.abspath(__file__))
COMPONENTS_PATH = os.path.join(PACKAGE_DIR, 'components.yaml')
DEFAULTS_PATH = os.path.join(PACKAGE_DIR, 'defaults.yaml')


class ConfigFileError(DataError):

    ERRMSG = 'The configuration file "{}" is not a YAML mapping.'


def read_yaml(path: str) -> dict:
    with open(path, 'r') as fp:
        conf = yaml.safe_load(fp.read())

    if conf is None:
        return {}

    if not isinstance(conf, dict):
        raise ConfigFileError(ConfigFileError.ERRMSG.format(path))

    return conf


def load_run_config(path: str = None, overrides: dict = None) -> dict:
    """
    The packaged defaults, deep-merged with the file at `path` and then with
    `overrides` (values given on the command line).
    """
    conf = read_yaml(DEFAULTS_PATH)

    if path is not None:
        conf = dictmerge(conf, read_yaml(path))

    return dictmerge(conf, overrides or {})


def provider_from_yaml(run_conf: dict = None, components_path: str = COMPONENTS_PATH) -> ComponentProvider:
    provider = ComponentProvider()
    provider.conf(read_yaml(components_path), run_conf if run_conf is not None else load_run_config())

    return provider
