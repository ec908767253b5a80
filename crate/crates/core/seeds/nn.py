import math


def solve(coords):
    n = len(coords)

    def dist(a, b):
        dx = coords[a][0] - coords[b][0]
        dy = coords[a][1] - coords[b][1]
        return math.sqrt(dx * dx + dy * dy)

    visited = [False] * n
    tour = [0]
    visited[0] = True
    current = 0
    while len(tour) < n:
        best = -1
        best_d = 0.0
        for c in range(n):
            if visited[c]:
                continue
            d = dist(current, c)
            if best < 0 or d < best_d:
                best = c
                best_d = d
        visited[best] = True
        tour.append(best)
        current = best
    return tour
