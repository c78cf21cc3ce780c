RESULTS: dict[int, str] = {}
