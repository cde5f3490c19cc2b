def roman_numeral(number):
    table = [(1000, "M"), (900, "CM"), (500, "D"), (400, "CD"), (100, "C"), (90, "XC"),
             (50, "L"), (40, "XL"), (10, "X"), (9, "IX"), (5, "V"), (4, "IV"), (1, "I")]
    if number <= 0:
        return ""
    parts = []
    for value, symbol in table:
        while number >= value:
            parts.append(symbol)
            number -= value
    return "".join(parts)
