def maxSubArray(nums: list[int]) -> int:
    if len(nums) == 0:
        return 0
    best = nums[0]
    current = 0
    for x in nums:
        current = current + x
        if current > best:
            best = current
        if current < 0:
            current = 0
    return best
