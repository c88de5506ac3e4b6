import os

from ast import literal_eval

from dotenv import find_dotenv, load_dotenv
from werkzeug.local import Local

from hallcal.errors import HallCalError
from hallcal.meta.ioc import Importer
from hallcal.tools.dicttools import dictpath

# Loads HALLCAL_* env vars from a .env file, if any
load_dotenv(find_dotenv(usecwd=True))


class ComponentError(HallCalError):

    pass


class UnknownComponentError(ComponentError):

    pass


class TooManyCreationMethodsError(ComponentError):

    pass


class NoCreationMethodError(ComponentError):

    pass


class NotAComponentFactoryError(ComponentError):

    pass


class BadConfPathError(ComponentError):

    pass


class ComponentProvider:
    """
    Builds calibration components (solvers, surrogates) from a registry.

    Each registry entry declares exactly one of `class`, `factory` or
    `instance` by dotted path, plus optional `arguments` and
    `named_arguments`. Argument strings are resolved as:

      '@name'         another component
      '%a.b%'         a path into the run configuration
      '$VAR'          an environment variable (literal-evaluated)
      [$VAR, ref]     an environment variable with a default reference
      '^dotted.path'  an importable object

    Entries declared with no creation method are slots for runtime objects
    (the layout, the scenario) and must be filled with set().
    """

    UNKNOWN_COMPONENT_ERRMSG = '"{}" is not a component we know of.'
    TOO_MANY_CREATION_METHODS_ERRMSG = 'You must define either a class, an instance, ' \
                                       'or a factory for the component "{}", not several.'
    NO_CREATION_METHOD_ERRMSG = 'The component "{}" has no class, instance or factory ' \
                                'and was not set at runtime.'
    NOT_A_COMPONENT_FACTORY_ERRMSG = 'The factory class for the component ' \
                                     '"{}" does not have a "build" method.'
    BAD_CONF_PATH_ERRMSG = 'The path "{}" was not found in the run configuration.'

    _creation_meths = {
        'instance': '_get_instance',
        'class': '_instance_with_class',
        'factory': '_instance_with_factory'
    }

    def __init__(self, registry: dict = None, run_conf: dict = None):
        self.importer = Importer()
        self.registry = {}
        self.run_conf = {}
        self._local = Local()
        self.conf(registry or {}, run_conf)

    def _init_local(self):
        if not hasattr(self._local, 'set_components'):
            self._local.set_components = {}

    def conf(self, registry: dict, run_conf: dict = None):
        self.registry = registry
        self.run_conf = run_conf if run_conf is not None else {}

    def get(self, name: str, /, **kwargs):
        self._init_local()

        if name not in self.registry:
            raise UnknownComponentError(self.UNKNOWN_COMPONENT_ERRMSG.format(name))

        if name in self._local.set_components:
            return self._local.set_components[name]

        return self._get_built(name, **kwargs)

    def set(self, name: str, component):
        self._init_local()

        if name not in self.registry:
            raise UnknownComponentError(self.UNKNOWN_COMPONENT_ERRMSG.format(name))

        self._local.set_components[name] = component

    def _get_built(self, name: str, /, **kwargs):
        definition = self.registry[name] or {}
        methods = [k for k in self._creation_meths if k in definition]

        if 1 < len(methods):
            raise TooManyCreationMethodsError(self.TOO_MANY_CREATION_METHODS_ERRMSG.format(name))

        if not methods:
            raise NoCreationMethodError(self.NO_CREATION_METHOD_ERRMSG.format(name))

        return getattr(self, self._creation_meths[methods[0]])(name, **kwargs)

    def _get_instance(self, name: str, /, **kwargs):
        return self.importer.get_obj(self.registry[name]['instance'])

    def _instance_with_class(self, name: str, /, **kwargs):
        cls = self.importer.get_obj(self.registry[name]['class'])

        return cls(*self._get_args(name), **self._get_kwargs(name, **kwargs))

    def _instance_with_factory(self, name: str, /, **kwargs):
        factory_class = self.importer.get_obj(self.registry[name]['factory'])

        if not callable(getattr(factory_class, 'build', None)):
            raise NotAComponentFactoryError(self.NOT_A_COMPONENT_FACTORY_ERRMSG.format(name))

        return factory_class().build(*self._get_args(name), **self._get_kwargs(name, **kwargs))

    def _get_args(self, name: str):
        return [self._get_arg(ref) for ref in self.registry[name].get('arguments', [])]

    def _get_kwargs(self, name: str, /, **kwargs):
        named_arguments = {}

        for k, v in self.registry[name].get('named_arguments', {}).items():
            named_arguments[k] = kwargs[k] if kwargs.get(k) is not None else self._get_arg(v)

        return named_arguments

    def _get_arg(self, ref):
        if isinstance(ref, str) and ref:
            if '@' == ref[0]:
                return self.get(ref[1:])
            elif '%' == ref[0] == ref[-1:] and len(ref) > 1:
                return self._get_conf(ref[1:-1])
            elif '$' == ref[0]:
                return self._get_env(ref[1:])
            elif '^' == ref[0]:
                return self.importer.get_obj(ref[1:])

        elif isinstance(ref, list) and ref:
            if isinstance(ref[0], str) and ref[0].startswith('$'):
                return self._get_env(ref[0][1:], ref[1] if len(ref) > 1 else None)
            else:
                return [self._get_arg(i) for i in ref]

        return ref  # Literal

    def _get_conf(self, path: str):
        parts = path.split('.')

        try:
            trunk = self.run_conf[parts[0]]
        except KeyError:
            raise BadConfPathError(self.BAD_CONF_PATH_ERRMSG.format(parts[0]))

        try:
            return dictpath(trunk, parts[1:])
        except KeyError as e:
            raise BadConfPathError(self.BAD_CONF_PATH_ERRMSG.format(e.args[0]))

    def _get_env(self, var: str, default=None):
        string = os.environ.get(var)

        if string is None:
            return self._get_arg(default)

        try:
            return literal_eval(string)
        except (SyntaxError, ValueError):
            return string
