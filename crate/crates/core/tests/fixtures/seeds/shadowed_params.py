def shadowed_params(values, factor):
    def scale(values):
        return [v * factor for v in values]
    def factor_of(factor):
        return factor * 2
    scaled = scale(values)
    doubled = factor_of(factor)
    return scaled, doubled
