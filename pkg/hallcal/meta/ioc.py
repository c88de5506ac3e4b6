import importlib


class Importer:

    NOT_FOUND_ERRMSG = 'Nothing called "{}" in module "{}".'

    def __init__(self):
        self._cache = {}

    def get_obj(self, class_path: str):
        """Get a class, function or instance by its dotted path."""
        if class_path not in self._cache:
            module_name, _, attr = class_path.rpartition('.')
            module = importlib.import_module(module_name)

            try:
                self._cache[class_path] = getattr(module, attr)
            except AttributeError:
                raise ImportError(self.NOT_FOUND_ERRMSG.format(attr, module_name))

        return self._cache[class_path]
