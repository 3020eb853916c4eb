def trimStack(nums: list[int], limit: int) -> int:
    stack = []
    for x in nums:
        stack.append(x)
        if len(stack) == 0:
            return -1
    popped = 0
    while len(stack) > 0 and stack[-1] > limit:
        stack.pop()
        popped += 1
    return popped
