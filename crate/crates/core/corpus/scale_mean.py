def scaleMean(a: int, b: float) -> float:
    s = a * b
    if s > 1.5:
        return s / 2
    if a == 0 and s != 0.0:
        return -1.0
    return s - 0.5
