def removeElement(nums: list[int], val: int) -> int:
    k = 0
    for i in range(len(nums)):
        if k > i:
            return -1
        if nums[i] != val:
            nums[k] = nums[i]
            k += 1
    return k
