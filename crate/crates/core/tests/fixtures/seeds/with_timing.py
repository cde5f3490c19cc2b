def with_timing(label, action, clock=None):
    import time
    clock = clock or time.perf_counter
    started = clock()
    try:
        result = action()
    finally:
        elapsed = clock() - started
        print(f"{label}: {elapsed:.3f}s")
    return result, elapsed
