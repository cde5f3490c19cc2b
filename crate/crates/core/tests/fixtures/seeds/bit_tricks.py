def bit_tricks(value):
    flags = 0x0F
    mask = 0b1010_1010
    big = 1_000_000
    small = 1e-3
    mixed = (value & flags) | (value ^ mask)
    ratio = value / big + small
    return mixed, ratio, value << 2, value >> 1
