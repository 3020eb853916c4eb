def pivotIndex(nums: list[int]) -> int:
    total = 0
    for x in nums:
        total += x
    left = 0
    for i in range(len(nums)):
        if left * 2 + nums[i] == total:
            return i
        left += nums[i]
    return -1
