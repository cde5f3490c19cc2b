def annotated_locals(limit: int) -> dict:
    cache: dict[int, int]
    cache = {}
    total: int = 0
    for n in range(limit):
        cache[n] = n * n
        total += cache[n]
    assert total >= 0, "sum of squares is non-negative"
    return {"total": total, "size": len(cache)}
