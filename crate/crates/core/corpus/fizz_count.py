def fizzCount(n: int) -> int:
    count = 0
    i = 1
    while i <= n:
        if i % 3 == 0 and i % 5 != 0:
            count += 1
        i += 1
    if count > n:
        return -1
    return count
