def set_operations(left, right):
    union = set(left) | set(right)
    common = set(left) & set(right)
    only_left = set(left) - set(right)
    either = set(left) ^ set(right)
    union |= {0}
    return sorted(union), sorted(common), sorted(only_left), sorted(either)
