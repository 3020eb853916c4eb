def average(nums: list[float]) -> float:
    total = 0.0
    count = 0
    for x in nums:
        total = total + x
        count += 1
    if count > len(nums):
        return -1.0
    if count == 0:
        return 0.0
    return total / count
