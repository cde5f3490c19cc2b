def collatz_length(start):
    steps = 0
    value = start
    peak = start
    while value != 1:
        if value % 2 == 0:
            value //= 2
        else:
            value = 3 * value + 1
        steps += 1
        peak = max(peak, value)
    return steps, peak
