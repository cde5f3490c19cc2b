def try_everything(path, parse, fallback):
    handle = None
    try:
        handle = open(path)
        content = handle.read()
    except FileNotFoundError:
        content = fallback
    except (PermissionError, IsADirectoryError) as error:
        raise RuntimeError(str(error)) from error
    else:
        content = content.strip()
    finally:
        if handle is not None:
            handle.close()
    return parse(content)
