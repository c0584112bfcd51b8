DEFAULT = 10
limit = DEFAULT
