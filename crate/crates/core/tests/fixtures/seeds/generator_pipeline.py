def generator_pipeline(lines):
    stripped = (line.strip() for line in lines)
    non_empty = (line for line in stripped if line)
    numbered = enumerate(non_empty, start=1)
    yield from ((n, line.upper()) for n, line in numbered)
    yield (0, "END")
