def digitSum(x: int) -> int:
    if x < 0:
        x = -x
    total = 0
    while x > 0:
        total += x % 10
        x = x // 10
    if x > 0:
        return -1
    return total
