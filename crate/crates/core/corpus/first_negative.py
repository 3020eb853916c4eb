def firstNegative(nums: list[int]) -> int:
    index = -1
    for i in range(len(nums)):
        if nums[i] < 0:
            index = i
            break
    return index
