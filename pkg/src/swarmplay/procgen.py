"""Seeded procedural grid worlds.

Grid cells become rooms joined by 4-neighborhood exits; seeded edge walls
carve the maze, and optional key-gated door edges are placed along the
shortest start-to-goal route so every generated world stays solvable.  The
whole construction is a pure function of the seed.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from .world import (
    Container,
    Direction,
    Exit,
    GoalAtom,
    GoalPredicate,
    InvalidSpecError,
    Item,
    Room,
    WorldSpec,
    solve_world,
    validate_spec,
)

MAX_ATTEMPTS = 16

_DELTAS = {
    Direction.NORTH: (0, -1),
    Direction.SOUTH: (0, 1),
    Direction.EAST: (1, 0),
    Direction.WEST: (-1, 0),
}


class GenerationFailedError(Exception):
    pass


@dataclass(frozen=True)
class ProcgenParams:
    seed: int
    grid_width: int
    grid_height: int
    wall_density: float
    n_keys: int = 0
    min_goal_distance: int = 1

    def validate(self) -> None:
        if self.grid_width < 3 or self.grid_height < 3:
            raise InvalidSpecError("grid dimensions must be at least 3")
        if not 0.0 <= self.wall_density < 1.0:
            raise InvalidSpecError("wall_density must be in [0, 1)")
        if self.n_keys < 0:
            raise InvalidSpecError("n_keys must be non-negative")
        if self.min_goal_distance < 1:
            raise InvalidSpecError("min_goal_distance must be positive")


def _cell_id(x: int, y: int) -> str:
    return f"cell-{x}-{y}"


def _neighbors(x: int, y: int, width: int, height: int):
    for direction, (dx, dy) in _DELTAS.items():
        nx, ny = x + dx, y + dy
        if 0 <= nx < width and 0 <= ny < height:
            yield direction, (nx, ny)


def _bfs_distances(edges: set[frozenset], start: tuple[int, int], width: int, height: int):
    dist = {start: 0}
    queue = deque([start])
    while queue:
        cell = queue.popleft()
        for _, nxt in _neighbors(*cell, width, height):
            if frozenset((cell, nxt)) in edges and nxt not in dist:
                dist[nxt] = dist[cell] + 1
                queue.append(nxt)
    return dist


def _shortest_path(edges: set[frozenset], start, goal, width, height):
    prev = {start: None}
    queue = deque([start])
    while queue:
        cell = queue.popleft()
        if cell == goal:
            path = [cell]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return list(reversed(path))
        for _, nxt in _neighbors(*cell, width, height):
            if frozenset((cell, nxt)) in edges and nxt not in prev:
                prev[nxt] = cell
                queue.append(nxt)
    return None


def _keyed_reachable(
    edges: set[frozenset],
    doors: dict[frozenset, str],
    key_cells: dict[str, tuple[int, int]],
    start,
    width,
    height,
) -> set[tuple[int, int]]:
    """Cells reachable when keys are picked up on entry to their cell."""
    held: set[str] = set()
    reached = {start}
    changed = True
    while changed:
        changed = False
        for key_id, cell in key_cells.items():
            if cell in reached and key_id not in held:
                held.add(key_id)
                changed = True
        frontier = deque(reached)
        while frontier:
            cell = frontier.popleft()
            for _, nxt in _neighbors(*cell, width, height):
                edge = frozenset((cell, nxt))
                if edge not in edges or nxt in reached:
                    continue
                key_needed = doors.get(edge)
                if key_needed is not None and key_needed not in held:
                    continue
                reached.add(nxt)
                frontier.append(nxt)
                changed = True
    return reached


def _attempt(params: ProcgenParams, attempt: int) -> WorldSpec | None:
    rng = random.Random(params.seed ^ attempt)
    width, height = params.grid_width, params.grid_height
    start = (0, 0)

    # Walk cells in fixed order so wall placement is a pure function of the rng.
    edges: set[frozenset] = set()
    for y in range(height):
        for x in range(width):
            for direction in (Direction.EAST, Direction.SOUTH):
                dx, dy = _DELTAS[direction]
                nx, ny = x + dx, y + dy
                if nx >= width or ny >= height:
                    continue
                if rng.random() >= params.wall_density:
                    edges.add(frozenset(((x, y), (nx, ny))))

    dist = _bfs_distances(edges, start, width, height)
    candidates = [c for c, d in dist.items() if d >= params.min_goal_distance]
    if not candidates:
        return None
    goal_cell = max(candidates, key=lambda c: (dist[c], -c[1], -c[0]))
    path = _shortest_path(edges, start, goal_cell, width, height)
    if path is None:
        return None

    # Doors go on evenly spaced path edges; each key is placed in the region
    # reachable before its own door (given the earlier keys), so pickups can
    # happen in order.
    doors: dict[frozenset, str] = {}
    key_cells: dict[str, tuple[int, int]] = {}
    if params.n_keys:
        path_edges = [frozenset((path[i], path[i + 1])) for i in range(len(path) - 1)]
        if len(path_edges) < params.n_keys + 1:
            return None
        picks = []
        for i in range(params.n_keys):
            idx = (i + 1) * len(path_edges) // (params.n_keys + 1)
            if picks and idx <= picks[-1]:
                idx = picks[-1] + 1
            if idx >= len(path_edges):
                return None
            picks.append(idx)
        for i, idx in enumerate(picks):
            doors[path_edges[idx]] = f"key-{i}"
        for i, idx in enumerate(picks):
            key_id = f"key-{i}"
            remaining = {e: k for e, k in doors.items() if k != key_id or False}
            region = _keyed_reachable(
                edges,
                {e: k for e, k in doors.items()},
                {k: c for k, c in key_cells.items()},
                start,
                width,
                height,
            )
            if not region:
                return None
            key_cells[key_id] = sorted(region)[rng.randrange(len(region))]

    if goal_cell not in _keyed_reachable(edges, doors, key_cells, start, width, height):
        return None

    rooms = tuple(
        Room(
            id=_cell_id(x, y),
            name=f"Chamber ({x},{y})",
            description=f"A bare stone chamber at column {x}, row {y}.",
        )
        for y in range(height)
        for x in range(width)
    )
    exits: dict[str, dict[Direction, Exit]] = {}
    for y in range(height):
        for x in range(width):
            room_exits: dict[Direction, Exit] = {}
            for direction, nxt in _neighbors(x, y, width, height):
                edge = frozenset(((x, y), nxt))
                if edge not in edges:
                    continue
                room_exits[direction] = Exit(
                    dest_room_id=_cell_id(*nxt), required_item=doors.get(edge)
                )
            if room_exits:
                exits[_cell_id(x, y)] = room_exits
    items = tuple(
        Item(
            id=key_id,
            name=key_id.replace("-", " "),
            initial_location=_cell_id(*cell),
            portable=True,
        )
        for key_id, cell in sorted(key_cells.items())
    )
    spec = WorldSpec(
        world_id=f"procgen-{params.seed}-{width}x{height}",
        rooms=rooms,
        exits=exits,
        items=items,
        containers=(),
        start_room=_cell_id(*start),
        goal=GoalPredicate(atoms=(GoalAtom(kind="at_room", ref=_cell_id(*goal_cell)),)),
        max_steps_hint=1,  # placeholder until the certificate is computed
        metadata={},
    )
    solution = solve_world(spec)
    if solution is None:
        return None
    spec = WorldSpec(
        world_id=spec.world_id,
        rooms=spec.rooms,
        exits=spec.exits,
        items=spec.items,
        containers=spec.containers,
        start_room=spec.start_room,
        goal=spec.goal,
        max_steps_hint=max(3 * len(solution), 10),
        metadata={
            "generator": {
                "seed": params.seed,
                "grid_width": width,
                "grid_height": height,
                "wall_density": params.wall_density,
                "n_keys": params.n_keys,
                "min_goal_distance": params.min_goal_distance,
                "attempt": attempt,
            },
            "solution": [a.canonical_text for a in solution],
        },
    )
    validate_spec(spec)
    return spec


def generate_world(params: ProcgenParams) -> WorldSpec:
    """Deterministic world from params; retries with sub-seeds seed^attempt."""
    params.validate()
    for attempt in range(MAX_ATTEMPTS):
        spec = _attempt(params, attempt)
        if spec is not None:
            return spec
    raise GenerationFailedError(
        f"no solvable world after {MAX_ATTEMPTS} attempts for seed {params.seed}"
    )
