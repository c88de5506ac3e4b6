

def dictpath(dictionary: dict, path: list):
    """
    Find the node within a dictionary described by the path list.
    Raises KeyError with the first missing key.
    """
    node = dictionary

    for key in path:
        if not isinstance(node, dict):
            raise KeyError(key)

        node = node[key]

    return node


def dictmerge(base: dict, override: dict) -> dict:
    """
    Deep-merge override into a copy of base. Nested dicts are merged,
    anything else in override replaces the value in base.
    """
    merged = dict(base)

    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = dictmerge(merged[key], value)
        else:
            merged[key] = value

    return merged
