def countEvens(nums: list[int]) -> int:
    evens = 0
    for x in nums:
        if x % 2 != 0:
            continue
        evens += 1
    if evens > len(nums):
        return -1
    return evens
