def conditional_import(fast=True):
    if fast:
        try:
            import ujson as json
        except ImportError:
            import json
    else:
        import json
    encoder = json.dumps
    decoded = json.loads(encoder({"fast": fast}))
    return decoded
