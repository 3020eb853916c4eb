def gcd(a: int, b: int) -> int:
    if a < 0 or b < 0:
        return -1
    while b != 0:
        t = b
        b = a % b
        a = t
    if b != 0:
        return -2
    return a
