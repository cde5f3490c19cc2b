def inline_guards(data, key, default=None):
    if not data: return default
    value = data.get(key, default)
    if value is None: return default
    while isinstance(value, list) and len(value) == 1: value = value[0]
    return value
