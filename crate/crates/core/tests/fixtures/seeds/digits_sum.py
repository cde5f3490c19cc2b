def digits_sum(number, base=10):
    number = abs(number)
    total = 0
    count = 0
    while number > 0:
        total += number % base
        number //= base
        count += 1
    if count == 0:
        count = 1
    return total, count
