def arraySign(nums: list[int]) -> int:
    negative = False
    for x in nums:
        if x == 0:
            return 0
        if x < 0:
            negative = not negative
    if negative:
        return -1
    return 1
