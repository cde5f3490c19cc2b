def update_registry(name, handler):
    global REGISTRY
    if REGISTRY is None:
        REGISTRY = {}
    previous = REGISTRY.get(name)
    REGISTRY[name] = handler
    if previous is not None:
        print(f"replaced handler for {name}")
    return previous
