def split_dataset(rows, ratio=0.8, seed=13):
    import random
    shuffled = list(rows)
    rng = random.Random(seed)
    rng.shuffle(shuffled)
    cut = int(len(shuffled) * ratio)
    train, test = shuffled[:cut], shuffled[cut:]
    if not test and train:
        test.append(train.pop())
    return train, test
