import math


def solve(coords):
    n = len(coords)
    if n <= 2:
        return list(range(n))

    def dist(a, b):
        dx = coords[a][0] - coords[b][0]
        dy = coords[a][1] - coords[b][1]
        return math.sqrt(dx * dx + dy * dy)

    a, b = 0, 1
    best_d = dist(0, 1)
    for i in range(n):
        for j in range(i + 1, n):
            d = dist(i, j)
            if d > best_d:
                a, b, best_d = i, j, d
    tour = [a, b]
    in_tour = [False] * n
    in_tour[a] = in_tour[b] = True
    to_tour = [min(dist(c, a), dist(c, b)) for c in range(n)]

    for _ in range(n - 2):
        pick = -1
        for c in range(n):
            if not in_tour[c] and (pick < 0 or to_tour[c] > to_tour[pick]):
                pick = c
        k = len(tour)
        best_pos, best_cost = 0, math.inf
        for p in range(k):
            u, v = tour[p], tour[(p + 1) % k]
            cost = dist(u, pick) + dist(pick, v) - dist(u, v)
            if cost < best_cost:
                best_pos, best_cost = p, cost
        tour.insert(best_pos + 1, pick)
        in_tour[pick] = True
        for c in range(n):
            d = dist(c, pick)
            if d < to_tour[c]:
                to_tour[c] = d
    return tour
