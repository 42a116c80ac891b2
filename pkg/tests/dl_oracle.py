"""Brute-force minimal-edit-script search used as the DL distance oracle.

Independent of the dynamic-programming implementation: distances are found
by breadth-first search over the four raw edit operations (insert, delete,
substitute, transpose adjacent). Any pair of sequences with max length 4 has
distance at most 4, so radius-2 balls around both endpoints always meet in
the middle of an optimal script.
"""

from __future__ import annotations

from itertools import product


def edit_neighbors(state: tuple, alphabet: tuple) -> set[tuple]:
    out = set()
    n = len(state)
    for i in range(n):  # deletions
        out.add(state[:i] + state[i + 1 :])
    for i in range(n):  # substitutions
        for token in alphabet:
            if token != state[i]:
                out.add(state[:i] + (token,) + state[i + 1 :])
    for i in range(n + 1):  # insertions
        for token in alphabet:
            out.add(state[:i] + (token,) + state[i:])
    for i in range(n - 1):  # adjacent transpositions
        if state[i] != state[i + 1]:
            out.add(state[:i] + (state[i + 1], state[i]) + state[i + 2 :])
    return out


def edit_ball(state: tuple, radius: int, alphabet: tuple) -> dict[tuple, int]:
    dist = {state: 0}
    frontier = [state]
    for d in range(1, radius + 1):
        next_frontier = []
        for current in frontier:
            for neighbor in edit_neighbors(current, alphabet):
                if neighbor not in dist:
                    dist[neighbor] = d
                    next_frontier.append(neighbor)
        frontier = next_frontier
    return dist


def oracle_distance(ball_a: dict[tuple, int], ball_b: dict[tuple, int]) -> int:
    small, large = (ball_a, ball_b) if len(ball_a) <= len(ball_b) else (ball_b, ball_a)
    best = None
    for state, d in small.items():
        other = large.get(state)
        if other is not None and (best is None or d + other < best):
            best = d + other
    assert best is not None, "radius-2 balls must meet for max length 4"
    return best


def all_sequences(alphabet: tuple, max_len: int) -> list[tuple]:
    out: list[tuple] = []
    for length in range(max_len + 1):
        out.extend(product(alphabet, repeat=length))
    return out
