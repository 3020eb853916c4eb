def absDiff(a: int, b: int) -> int:
    d = abs(a - b)
    if d < 0:
        return -1
    if d > 3:
        return d - 3
    return 0
