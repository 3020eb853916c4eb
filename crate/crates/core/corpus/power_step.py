def halveUntilOdd(x: int) -> int:
    steps = 0
    if x == 0:
        return 0
    while x % 2 == 0:
        x = x // 2
        steps += 1
    if x % 2 == 0:
        return -1
    return steps
