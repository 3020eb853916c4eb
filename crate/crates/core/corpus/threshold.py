def classify(x: int) -> int:
    if x > 3:
        if x < 2:
            return 2
        return 1
    return 0
