import math

SEED = 0x5EED
MASK = (1 << 64) - 1


def _splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return state, z ^ (z >> 31)


def solve(coords):
    n = len(coords)
    if n <= 2:
        return list(range(n))

    def dist(a, b):
        dx = coords[a][0] - coords[b][0]
        dy = coords[a][1] - coords[b][1]
        return math.sqrt(dx * dx + dy * dy)

    order = list(range(n))
    state = SEED
    for i in range(n - 1, 0, -1):
        state, r = _splitmix64(state)
        j = r % (i + 1)
        order[i], order[j] = order[j], order[i]

    tour = [order[0], order[1]]
    for city in order[2:]:
        k = len(tour)
        best_pos, best_cost = 0, math.inf
        for p in range(k):
            u, v = tour[p], tour[(p + 1) % k]
            cost = dist(u, city) + dist(city, v) - dist(u, v)
            if cost < best_cost:
                best_pos, best_cost = p, cost
        tour.insert(best_pos + 1, city)
    return tour
