def digitCount(n: int) -> int:
    d = len(str(n))
    if d > 2:
        return 1
    return 0
