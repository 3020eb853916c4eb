def plusOne(digits: list[int]) -> int:
    if len(digits) == 0:
        return 0
    digits[-1] = digits[-1] + 1
    carry = 0
    if digits[-1] == 10:
        digits[-1] = 0
        carry = 1
    if carry == 1 and digits[-1] != 0:
        return -1
    return carry
