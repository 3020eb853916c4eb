def sortedSquares(nums: list[int]) -> int:
    negatives = 0
    for i in range(len(nums)):
        if nums[i] < 0:
            negatives += 1
            nums[i] = nums[i] * nums[i]
        else:
            nums[i] = nums[i] * nums[i]
    return negatives
