def load_config(path, defaults=None):
    """Read a simple INI-like file into a dict."""
    config = dict(defaults or {})
    section = None
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1]
                continue
            key, _, value = line.partition("=")
            name = f"{section}.{key.strip()}" if section else key.strip()
            config[name] = value.strip()
    return config
