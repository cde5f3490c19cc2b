def aggregate_metrics(samples, keys=("latency", "errors")):
    totals = {key: 0 for key in keys}
    maxima = {key: float("-inf") for key in keys}
    for sample in samples:
        for key in keys:
            value = sample.get(key, 0)
            totals[key] += value
            if value > maxima[key]:
                maxima[key] = value
    count = len(samples) or 1
    means = {key: totals[key] / count for key in keys}
    return means, maxima
