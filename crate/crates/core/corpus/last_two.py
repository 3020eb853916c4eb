def lastTwo(nums: list[int]) -> int:
    if len(nums) < 2:
        return 0
    if nums[-1] == nums[len(nums) - 1]:
        if nums[-2] > nums[-1]:
            return 1
        return 2
    return 3
