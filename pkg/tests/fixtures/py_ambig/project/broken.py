def good():
    return 1


value = 1
  stray = value
note = "unfinished
