"""Deterministic text-adventure worlds.

Holds the static world definition (rooms, exits, items, containers, goal),
the mutable episode state, the pure step engine, and canonical on-disk
serialization.  Everything here is a pure function of its inputs so episodes
replay bit-exactly across processes.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .util import canonical_json, pretty_json, sha256_hex

WORLD_FORMAT_VERSION = 1

# Location encoding for items: "room:<id>", "container:<id>", or "inventory".
LOC_INVENTORY = "inventory"


class WorldError(Exception):
    """Base class for world-model errors."""


class InvalidSpecError(WorldError):
    pass


class EpisodeFinishedError(WorldError):
    pass


class Direction(str, Enum):
    NORTH = "north"
    SOUTH = "south"
    EAST = "east"
    WEST = "west"


# Fixed ordering used everywhere actions or exits are enumerated.
DIRECTION_ORDER = (Direction.NORTH, Direction.SOUTH, Direction.EAST, Direction.WEST)

OPPOSITE = {
    Direction.NORTH: Direction.SOUTH,
    Direction.SOUTH: Direction.NORTH,
    Direction.EAST: Direction.WEST,
    Direction.WEST: Direction.EAST,
}


class StepResult(str, Enum):
    OK = "ok"
    BLOCKED = "blocked"
    UNKNOWN_OBJECT = "unknown-object"
    NOTHING_HAPPENS = "nothing-happens"
    GOAL_REACHED = "goal-reached"


class ActionKind(str, Enum):
    MOVE = "move"
    OPEN = "open"
    TAKE = "take"
    DROP = "drop"
    LOOK = "look"
    INVENTORY = "inventory"


_VERB_TEXT = {
    ActionKind.MOVE: "go",
    ActionKind.OPEN: "open",
    ActionKind.TAKE: "take",
    ActionKind.DROP: "drop",
}

# Ordering rank for object verbs when two actions target the same object.
_OBJECT_VERB_RANK = {ActionKind.OPEN: 0, ActionKind.TAKE: 1, ActionKind.DROP: 2}


@dataclass(frozen=True)
class Action:
    """A player action; `arg` is a direction value or an object reference."""

    kind: ActionKind
    arg: str | None = None

    @property
    def canonical_text(self) -> str:
        if self.kind is ActionKind.LOOK:
            return "look"
        if self.kind is ActionKind.INVENTORY:
            return "inventory"
        return f"{_VERB_TEXT[self.kind]} {self.arg}"

    def __str__(self) -> str:  # pragma: no cover - debugging nicety
        return self.canonical_text


LOOK = Action(ActionKind.LOOK)
INVENTORY = Action(ActionKind.INVENTORY)


@dataclass(frozen=True)
class GoalAtom:
    kind: str  # at_room | holds | container_open
    ref: str


GOAL_ATOM_KINDS = ("at_room", "holds", "container_open")


@dataclass(frozen=True)
class GoalPredicate:
    """Conjunction of goal atoms; empty predicates are rejected at validation."""

    atoms: tuple[GoalAtom, ...]


@dataclass(frozen=True)
class Room:
    id: str
    name: str
    description: str


@dataclass(frozen=True)
class Exit:
    dest_room_id: str
    required_item: str | None = None


@dataclass(frozen=True)
class Item:
    id: str
    name: str
    initial_location: str  # room id or container id
    portable: bool = True


@dataclass(frozen=True)
class Container:
    id: str
    name: str
    room_id: str
    open: bool = False
    contents: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class WorldSpec:
    """Static game definition.  `eq=False` keeps instances hashable by identity
    so per-spec lookup tables can be cached."""

    world_id: str
    rooms: tuple[Room, ...]
    exits: dict[str, dict[Direction, Exit]]
    items: tuple[Item, ...]
    containers: tuple[Container, ...]
    start_room: str
    goal: GoalPredicate
    max_steps_hint: int
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class WorldState:
    """Mutable episode state, represented immutably; `step` returns new values."""

    current_room: str
    inventory: frozenset[str]
    item_locations: dict[str, str]
    container_flags: dict[str, bool]
    step_count: int = 0
    done: bool = False


@dataclass(frozen=True)
class Observation:
    room_id: str
    description_text: str
    visible_items: tuple[str, ...]
    available_exits: tuple[Direction, ...]
    last_result: StepResult
    state_digest: str
    step_count: int


class _Index:
    """Per-spec lookup tables, built once per WorldSpec instance."""

    def __init__(self, spec: WorldSpec):
        self.rooms = {r.id: r for r in spec.rooms}
        self.items = {i.id: i for i in spec.items}
        self.containers = {c.id: c for c in spec.containers}
        self.nouns: dict[str, tuple[str, str]] = {}
        for item in spec.items:
            self.nouns[item.id.lower()] = ("item", item.id)
            self.nouns[item.name.lower()] = ("item", item.id)
        for cont in spec.containers:
            self.nouns[cont.id.lower()] = ("container", cont.id)
            self.nouns[cont.name.lower()] = ("container", cont.id)


_INDEX_CACHE: dict[int, _Index] = {}


def _index(spec: WorldSpec) -> _Index:
    idx = _INDEX_CACHE.get(id(spec))
    if idx is None:
        idx = _Index(spec)
        if len(_INDEX_CACHE) > 512:
            _INDEX_CACHE.clear()
        _INDEX_CACHE[id(spec)] = idx
    return idx


def validate_spec(spec: WorldSpec, *, check_reachability: bool = False) -> None:
    """Check structural invariants; optionally prove the goal reachable by search."""
    ids: list[str] = [r.id for r in spec.rooms] + [i.id for i in spec.items] + [
        c.id for c in spec.containers
    ]
    if len(set(ids)) != len(ids):
        raise InvalidSpecError("room/item/container ids must be globally unique")
    room_ids = {r.id for r in spec.rooms}
    item_ids = {i.id for i in spec.items}
    container_ids = {c.id for c in spec.containers}
    if spec.start_room not in room_ids:
        raise InvalidSpecError(f"start_room {spec.start_room!r} is not a declared room")
    for rid, dirs in spec.exits.items():
        if rid not in room_ids:
            raise InvalidSpecError(f"exits declared for unknown room {rid!r}")
        for direction, ex in dirs.items():
            if ex.dest_room_id not in room_ids:
                raise InvalidSpecError(
                    f"exit {rid}/{direction.value} leads to unknown room {ex.dest_room_id!r}"
                )
            if ex.required_item is not None and ex.required_item not in item_ids:
                raise InvalidSpecError(
                    f"exit {rid}/{direction.value} requires unknown item {ex.required_item!r}"
                )
    for cont in spec.containers:
        if cont.room_id not in room_ids:
            raise InvalidSpecError(f"container {cont.id!r} placed in unknown room")
        for content in cont.contents:
            if content not in item_ids:
                raise InvalidSpecError(f"container {cont.id!r} holds unknown item {content!r}")
    for item in spec.items:
        loc = item.initial_location
        if loc not in room_ids and loc not in container_ids:
            raise InvalidSpecError(f"item {item.id!r} starts in unknown location {loc!r}")
        if loc in container_ids:
            cont = next(c for c in spec.containers if c.id == loc)
            if item.id not in cont.contents:
                raise InvalidSpecError(
                    f"item {item.id!r} starts in {loc!r} but is not listed in its contents"
                )
    if not spec.goal.atoms:
        raise InvalidSpecError("goal predicate must contain at least one atom")
    for atom in spec.goal.atoms:
        if atom.kind not in GOAL_ATOM_KINDS:
            raise InvalidSpecError(f"unknown goal atom kind {atom.kind!r}")
        domain = {"at_room": room_ids, "holds": item_ids, "container_open": container_ids}[
            atom.kind
        ]
        if atom.ref not in domain:
            raise InvalidSpecError(f"goal atom references unknown id {atom.ref!r}")
    # Noun table must be unambiguous: one entity per surface form.
    nouns: dict[str, tuple[str, str]] = {}
    for kind, entities in (("item", spec.items), ("container", spec.containers)):
        for ent in entities:
            for noun in {ent.id.lower(), ent.name.lower()}:
                prior = nouns.get(noun)
                if prior is not None and prior != (kind, ent.id):
                    raise InvalidSpecError(f"ambiguous noun {noun!r}")
                nouns[noun] = (kind, ent.id)
    if spec.max_steps_hint < 1:
        raise InvalidSpecError("max_steps_hint must be positive")
    if check_reachability and solve_world(spec) is None:
        raise InvalidSpecError("goal is not reachable from the start state")


def reset(spec: WorldSpec) -> WorldState:
    """Fresh episode state at the start room with initial item placement."""
    validate_spec(spec)
    room_ids = {r.id for r in spec.rooms}
    locations = {}
    for item in spec.items:
        loc = item.initial_location
        locations[item.id] = f"room:{loc}" if loc in room_ids else f"container:{loc}"
    return WorldState(
        current_room=spec.start_room,
        inventory=frozenset(),
        item_locations=locations,
        container_flags={c.id: c.open for c in spec.containers},
        step_count=0,
        done=False,
    )


def digest_state(state: WorldState) -> str:
    """Stable digest of (room, inventory, container flags).

    Item positions outside the inventory are deliberately excluded so that
    equivalent situations reached at different times or along different
    routes collapse to the same digest.
    """
    payload = canonical_json(
        [
            state.current_room,
            sorted(state.inventory),
            sorted((cid, flag) for cid, flag in state.container_flags.items()),
        ]
    )
    return sha256_hex(payload)[:16]


def state_key(state: WorldState) -> tuple:
    """Full-state key (ignores step_count); used by search and test oracles."""
    return (
        state.current_room,
        tuple(sorted(state.item_locations.items())),
        tuple(sorted(state.container_flags.items())),
    )


def is_goal(state: WorldState, spec: WorldSpec) -> bool:
    for atom in spec.goal.atoms:
        if atom.kind == "at_room" and state.current_room != atom.ref:
            return False
        if atom.kind == "holds" and atom.ref not in state.inventory:
            return False
        if atom.kind == "container_open" and not state.container_flags.get(atom.ref, False):
            return False
    return True


def goal_atoms_satisfied(state: WorldState, spec: WorldSpec) -> int:
    """Number of goal atoms currently true; used by plan-error analysis."""
    count = 0
    for atom in spec.goal.atoms:
        if atom.kind == "at_room":
            count += state.current_room == atom.ref
        elif atom.kind == "holds":
            count += atom.ref in state.inventory
        else:
            count += bool(state.container_flags.get(atom.ref, False))
    return count


def _visible_items(state: WorldState, spec: WorldSpec) -> list[str]:
    idx = _index(spec)
    room = state.current_room
    visible = []
    for item_id, loc in state.item_locations.items():
        if loc == f"room:{room}":
            visible.append(item_id)
        elif loc.startswith("container:"):
            cid = loc.split(":", 1)[1]
            cont = idx.containers[cid]
            if cont.room_id == room and state.container_flags.get(cid, False):
                visible.append(item_id)
    return sorted(visible)


def _containers_here(state: WorldState, spec: WorldSpec) -> list[Container]:
    return sorted(
        (c for c in spec.containers if c.room_id == state.current_room), key=lambda c: c.id
    )


def resolve_object(ref: str, state: WorldState, spec: WorldSpec) -> tuple[str, str] | None:
    """Resolve a noun against entities visible from the current state.

    Returns ("item", id) or ("container", id), or None when the noun does not
    name anything present here (items on the floor, items in open containers,
    inventory items, and containers in the room).
    """
    idx = _index(spec)
    target = idx.nouns.get(" ".join(ref.lower().split()))
    if target is None:
        return None
    kind, ent_id = target
    if kind == "container":
        return target if idx.containers[ent_id].room_id == state.current_room else None
    if ent_id in state.inventory or ent_id in _visible_items(state, spec):
        return target
    return None


def _available_exits(state: WorldState, spec: WorldSpec) -> tuple[Direction, ...]:
    dirs = []
    room_exits = spec.exits.get(state.current_room, {})
    for direction in DIRECTION_ORDER:
        ex = room_exits.get(direction)
        if ex is not None and (ex.required_item is None or ex.required_item in state.inventory):
            dirs.append(direction)
    return tuple(dirs)


def describe_state(state: WorldState, spec: WorldSpec) -> str:
    """Deterministic room description used for observations and trace files."""
    idx = _index(spec)
    room = idx.rooms[state.current_room]
    lines = [room.name, room.description]
    for cont in _containers_here(state, spec):
        flag = "open" if state.container_flags.get(cont.id, False) else "closed"
        lines.append(f"There is a {cont.name} ({flag}) here.")
    visible = _visible_items(state, spec)
    if visible:
        names = ", ".join(idx.items[i].name for i in visible)
        lines.append(f"You see: {names}.")
    exits = _available_exits(state, spec)
    if exits:
        lines.append("Exits: " + ", ".join(d.value for d in exits) + ".")
    else:
        lines.append("There are no obvious exits.")
    return "\n".join(lines)


def observe(state: WorldState, spec: WorldSpec, last_result: StepResult = StepResult.OK) -> Observation:
    return Observation(
        room_id=state.current_room,
        description_text=describe_state(state, spec),
        visible_items=tuple(_visible_items(state, spec)),
        available_exits=_available_exits(state, spec),
        last_result=last_result,
        state_digest=digest_state(state),
        step_count=state.step_count,
    )


def _advance(state: WorldState, **changes) -> WorldState:
    return replace(state, step_count=state.step_count + 1, **changes)


def step(state: WorldState, action: Action, spec: WorldSpec) -> tuple[WorldState, Observation]:
    """Apply one action; pure function of (state, action, spec).

    Blocked or unresolvable actions leave everything except step_count
    unchanged and report why via the observation's last_result.
    """
    if state.done:
        raise EpisodeFinishedError("episode already finished")

    result = StepResult.OK
    new_state: WorldState

    if action.kind in (ActionKind.LOOK, ActionKind.INVENTORY):
        new_state = _advance(state)
    elif action.kind is ActionKind.MOVE:
        try:
            direction = Direction(action.arg)
        except ValueError:
            direction = None
        if direction is None:
            result, new_state = StepResult.UNKNOWN_OBJECT, _advance(state)
        else:
            ex = spec.exits.get(state.current_room, {}).get(direction)
            if ex is None or (ex.required_item is not None and ex.required_item not in state.inventory):
                result, new_state = StepResult.BLOCKED, _advance(state)
            else:
                new_state = _advance(state, current_room=ex.dest_room_id)
    else:
        resolved = resolve_object(action.arg or "", state, spec)
        if resolved is None:
            result, new_state = StepResult.UNKNOWN_OBJECT, _advance(state)
        else:
            kind, ent_id = resolved
            if action.kind is ActionKind.OPEN:
                if kind != "container":
                    result, new_state = StepResult.BLOCKED, _advance(state)
                elif state.container_flags.get(ent_id, False):
                    result, new_state = StepResult.NOTHING_HAPPENS, _advance(state)
                else:
                    flags = dict(state.container_flags)
                    flags[ent_id] = True
                    new_state = _advance(state, container_flags=flags)
            elif action.kind is ActionKind.TAKE:
                idx = _index(spec)
                if kind != "item" or not idx.items[ent_id].portable or ent_id in state.inventory:
                    result, new_state = StepResult.BLOCKED, _advance(state)
                else:
                    locations = dict(state.item_locations)
                    locations[ent_id] = LOC_INVENTORY
                    new_state = _advance(
                        state,
                        item_locations=locations,
                        inventory=state.inventory | {ent_id},
                    )
            else:  # DROP
                if kind != "item" or ent_id not in state.inventory:
                    result, new_state = StepResult.BLOCKED, _advance(state)
                else:
                    locations = dict(state.item_locations)
                    locations[ent_id] = f"room:{state.current_room}"
                    new_state = _advance(
                        state,
                        item_locations=locations,
                        inventory=state.inventory - {ent_id},
                    )

    if is_goal(new_state, spec):
        new_state = replace(new_state, done=True)
        result = StepResult.GOAL_REACHED

    return new_state, observe(new_state, spec, result)


def legal_actions(state: WorldState, spec: WorldSpec) -> list[Action]:
    """Actions whose application never yields Blocked or UnknownObject.

    Deterministic order: moves in N,S,E,W order, then object actions sorted by
    object id (open before take before drop on ties), then look, inventory.
    """
    actions: list[Action] = [
        Action(ActionKind.MOVE, d.value) for d in _available_exits(state, spec)
    ]
    object_actions: list[Action] = []
    for cont in _containers_here(state, spec):
        # Re-opening an open container is a NothingHappens no-op, still listed.
        object_actions.append(Action(ActionKind.OPEN, cont.id))
    idx = _index(spec)
    for item_id in _visible_items(state, spec):
        if idx.items[item_id].portable and item_id not in state.inventory:
            object_actions.append(Action(ActionKind.TAKE, item_id))
    for item_id in sorted(state.inventory):
        object_actions.append(Action(ActionKind.DROP, item_id))
    object_actions.sort(key=lambda a: (a.arg, _OBJECT_VERB_RANK[a.kind]))
    actions.extend(object_actions)
    actions.append(LOOK)
    actions.append(INVENTORY)
    return actions


def solve_world(spec: WorldSpec, max_states: int = 500_000) -> list[Action] | None:
    """Breadth-first search from reset to the first goal state.

    Returns the action sequence, or None when the goal is unreachable.  Used
    for load-time validation, procgen certificates, and synthetic traces.
    """
    start = reset(spec)
    if is_goal(start, spec):
        return []
    seen = {state_key(start)}
    queue: deque[tuple[WorldState, list[Action]]] = deque([(start, [])])
    while queue:
        state, path = queue.popleft()
        for action in legal_actions(state, spec):
            if action.kind in (ActionKind.LOOK, ActionKind.INVENTORY):
                continue  # cannot change the state
            nxt, obs = step(state, action, spec)
            if obs.last_result is StepResult.GOAL_REACHED:
                return path + [action]
            key = state_key(nxt)
            if key in seen:
                continue
            seen.add(key)
            if len(seen) > max_states:
                raise InvalidSpecError("state space too large to verify reachability")
            queue.append((nxt, path + [action]))
    return None


def describe_goal(spec: WorldSpec) -> str:
    idx = _index(spec)
    parts = []
    for atom in sorted(spec.goal.atoms, key=lambda a: (a.kind, a.ref)):
        if atom.kind == "at_room":
            parts.append(f"be in the {idx.rooms[atom.ref].name}")
        elif atom.kind == "holds":
            parts.append(f"carry the {idx.items[atom.ref].name}")
        else:
            parts.append(f"have the {idx.containers[atom.ref].name} open")
    return "; ".join(parts)


# --- serialization ---------------------------------------------------------


def world_to_dict(spec: WorldSpec) -> dict:
    return {
        "format_version": WORLD_FORMAT_VERSION,
        "world_id": spec.world_id,
        "rooms": [
            {"id": r.id, "name": r.name, "description": r.description}
            for r in sorted(spec.rooms, key=lambda r: r.id)
        ],
        "exits": {
            rid: {
                direction.value: {
                    "dest_room_id": ex.dest_room_id,
                    "required_item": ex.required_item,
                }
                for direction, ex in dirs.items()
            }
            for rid, dirs in spec.exits.items()
        },
        "items": [
            {
                "id": i.id,
                "name": i.name,
                "initial_location": i.initial_location,
                "portable": i.portable,
            }
            for i in sorted(spec.items, key=lambda i: i.id)
        ],
        "containers": [
            {
                "id": c.id,
                "name": c.name,
                "room_id": c.room_id,
                "open": c.open,
                "contents": sorted(c.contents),
            }
            for c in sorted(spec.containers, key=lambda c: c.id)
        ],
        "start_room": spec.start_room,
        "goal": {
            "atoms": [
                {"kind": a.kind, "ref": a.ref}
                for a in sorted(spec.goal.atoms, key=lambda a: (a.kind, a.ref))
            ]
        },
        "max_steps_hint": spec.max_steps_hint,
        "metadata": spec.metadata,
    }


def world_from_dict(data: dict) -> WorldSpec:
    if data.get("format_version") != WORLD_FORMAT_VERSION:
        raise InvalidSpecError(f"unsupported world format_version {data.get('format_version')!r}")
    try:
        spec = WorldSpec(
            world_id=data["world_id"],
            rooms=tuple(Room(**r) for r in data["rooms"]),
            exits={
                rid: {
                    Direction(d): Exit(
                        dest_room_id=ex["dest_room_id"],
                        required_item=ex.get("required_item"),
                    )
                    for d, ex in dirs.items()
                }
                for rid, dirs in data["exits"].items()
            },
            items=tuple(
                Item(
                    id=i["id"],
                    name=i["name"],
                    initial_location=i["initial_location"],
                    portable=bool(i["portable"]),
                )
                for i in data["items"]
            ),
            containers=tuple(
                Container(
                    id=c["id"],
                    name=c["name"],
                    room_id=c["room_id"],
                    open=bool(c["open"]),
                    contents=tuple(c["contents"]),
                )
                for c in data["containers"]
            ),
            start_room=data["start_room"],
            goal=GoalPredicate(
                atoms=tuple(GoalAtom(kind=a["kind"], ref=a["ref"]) for a in data["goal"]["atoms"])
            ),
            max_steps_hint=int(data["max_steps_hint"]),
            metadata=dict(data.get("metadata", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpecError(f"malformed world document: {exc}") from exc
    return spec


def world_bytes(spec: WorldSpec) -> bytes:
    """Canonical serialization (sorted keys) so world hashes are stable."""
    return pretty_json(world_to_dict(spec)).encode("utf-8")


def save_world(spec: WorldSpec, path: str | Path) -> None:
    Path(path).write_bytes(world_bytes(spec))


def load_world(path: str | Path, *, check_reachability: bool = True) -> WorldSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidSpecError(f"world file is not valid JSON: {exc}") from exc
    spec = world_from_dict(data)
    validate_spec(spec, check_reachability=check_reachability)
    return spec
