def runningSum(nums: list[int]) -> int:
    for i in range(1, len(nums)):
        nums[i] = nums[i] + nums[i - 1]
        square = nums[i] * nums[i]
        if square < 0:
            return -1
    if len(nums) > 0:
        return nums[-1]
    return 0
