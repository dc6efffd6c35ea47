"""Max-min ant system over discrete design axes, plus a shortest-path demo.

Each axis of a :class:`DesignSpace` is an independent categorical choice.
An ant picks candidate ``c`` on an axis with probability proportional to
``tau[c]**alpha * eta[c]**beta``.  After every iteration all trails
evaporate by ``rho`` and only the iteration-best ant deposits ``Q / cost``
on the candidates it chose; trails are clamped to ``[tau_min, tau_max]``.

Randomness is keyed by ``(seed, iteration)``; ant ``i`` consumes row ``i``
of that iteration's draw, so results never depend on evaluation order or
worker count.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from anttenna.errors import ConnectivityError, ObjectiveError, ValidationError

SEED_MASK = (1 << 64) - 1


def worker_count() -> int:
    """Worker cap from ``ANTTENNA_THREADS`` (0 or unset means automatic)."""
    raw = os.environ.get("ANTTENNA_THREADS", "").strip()
    try:
        n = int(raw) if raw else 0
    except ValueError:
        raise ValidationError(f"ANTTENNA_THREADS must be an integer (got {raw!r})")
    if n < 0:
        raise ValidationError(f"ANTTENNA_THREADS must be >= 0 (got {n})")
    return n or min(8, os.cpu_count() or 1)


def iteration_rng(seed: int, iteration: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & SEED_MASK, iteration]))


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValidationError(f"axis {self.name!r} has no candidates", field=self.name)
        if len(set(self.values)) != len(self.values):
            raise ValidationError(f"axis {self.name!r} has duplicate candidates",
                                  field=self.name)


@dataclass(frozen=True)
class DesignSpace:
    axes: tuple[Axis, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise ValidationError("design space needs at least one axis")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValidationError("axis names must be unique")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Sequence]) -> "DesignSpace":
        return cls(tuple(Axis(k, tuple(v)) for k, v in mapping.items()))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a.values) for a in self.axes)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def assignment(self, choice: Sequence[int]) -> dict:
        return {a.name: a.values[i] for a, i in zip(self.axes, choice)}

    def enumerate(self):
        for choice in itertools.product(*(range(n) for n in self.shape)):
            yield tuple(choice)


@dataclass(frozen=True)
class AcoConfig:
    n_ants: int = 20
    iterations: int = 100
    alpha: float = 1.0
    beta: float = 2.0
    rho: float = 0.1
    q: float = 1.0
    tau_min: float = 0.01
    tau_max: float = 10.0
    seed: int = 0

    def __post_init__(self):
        problems = []
        if not (isinstance(self.n_ants, (int, np.integer)) and self.n_ants >= 1):
            problems.append(f"n_ants must be an integer >= 1 (got {self.n_ants})")
        if not (isinstance(self.iterations, (int, np.integer)) and self.iterations >= 1):
            problems.append(f"iterations must be an integer >= 1 (got {self.iterations})")
        if not self.alpha >= 0:
            problems.append(f"alpha must be >= 0 (got {self.alpha})")
        if not self.beta >= 0:
            problems.append(f"beta must be >= 0 (got {self.beta})")
        if not 0 <= self.rho <= 1:
            problems.append(f"rho must lie in [0, 1] (got {self.rho})")
        if not self.q > 0:
            problems.append(f"q must be > 0 (got {self.q})")
        if not 0 < self.tau_min < self.tau_max:
            problems.append(
                f"need 0 < tau_min < tau_max (got {self.tau_min}, {self.tau_max})")
        if problems:
            raise ValidationError(problems)


DEMO_CONFIG = AcoConfig(n_ants=10, iterations=25)


@dataclass(frozen=True, eq=False)
class PheromoneState:
    tau: tuple[np.ndarray, ...]
    tau_min: float
    tau_max: float

    @classmethod
    def initial(cls, space: DesignSpace, config: AcoConfig) -> "PheromoneState":
        return cls(tuple(np.full(n, config.tau_max) for n in space.shape),
                   config.tau_min, config.tau_max)

    def bounds_ok(self) -> bool:
        return all(np.all((t >= self.tau_min) & (t <= self.tau_max)) for t in self.tau)


class Objective:
    """Pure cost function over full assignments (smaller is better).

    ``cost_offset`` is added to the raw cost before it is turned into a
    deposit, so objectives measured in dB stay strictly positive.
    """

    def __init__(self, fn: Callable[[dict], float], name: str = "objective",
                 cost_offset: float = 0.0):
        self.fn = fn
        self.name = name
        self.cost_offset = float(cost_offset)

    def __call__(self, assignment: dict) -> float:
        try:
            cost = float(self.fn(assignment))
        except ObjectiveError:
            raise
        except Exception as exc:
            raise ObjectiveError(f"{self.name} failed: {exc}", assignment) from exc
        if not math.isfinite(cost):
            raise ObjectiveError(f"{self.name} returned non-finite cost {cost}", assignment)
        return cost

    def __repr__(self):
        return f"Objective({self.name!r}, cost_offset={self.cost_offset})"


def selection_probabilities(tau: np.ndarray, eta: np.ndarray | None,
                            alpha: float, beta: float) -> np.ndarray:
    weights = np.power(tau, alpha)
    if eta is not None and beta:
        weights = weights * np.power(eta, beta)
    total = weights.sum()
    if not total > 0 or not np.isfinite(total):
        raise ValidationError("degenerate selection distribution: all weights are zero")
    return weights / total


def _pick(p: np.ndarray, u: float) -> int:
    idx = int(np.searchsorted(np.cumsum(p), u, side="right"))
    return min(idx, len(p) - 1)


def construct_solution(space: DesignSpace, pheromone: PheromoneState,
                       heuristic: Sequence[np.ndarray] | None,
                       uniforms: Sequence[float], alpha: float = 1.0,
                       beta: float = 2.0) -> tuple[int, ...]:
    """Pick one candidate index per axis.

    ``uniforms`` supplies one U[0, 1) draw per axis (the ant's stream).
    """
    choice = []
    for k, axis in enumerate(space.axes):
        eta = None if heuristic is None else np.asarray(heuristic[k], float)
        if eta is not None and np.any(eta <= 0):
            raise ValidationError(f"heuristic on axis {axis.name!r} must be > 0")
        p = selection_probabilities(pheromone.tau[k], eta, alpha, beta)
        choice.append(_pick(p, uniforms[k]))
    return tuple(choice)


def update_pheromone(pheromone: PheromoneState,
                     evaluated: Sequence[tuple[tuple[int, ...], float]],
                     config: AcoConfig, cost_offset: float = 0.0) -> PheromoneState:
    """Evaporate everything, let the iteration-best ant deposit, clamp.

    ``evaluated`` is a list of ``(choice, raw_cost)`` in ant order; ties on
    cost go to the lowest ant index.  An empty list only evaporates.
    """
    tau = [(1.0 - config.rho) * t for t in pheromone.tau]
    if evaluated:
        best_choice, best_cost = min(evaluated, key=lambda e: e[1])
        cost = best_cost + cost_offset
        if not cost > 0:
            raise ObjectiveError(
                f"deposit needs a positive cost, got {cost} (raw {best_cost} + offset "
                f"{cost_offset})", best_choice)
        delta = config.q / cost
        for k, c in enumerate(best_choice):
            tau[k][c] += delta
    tau = tuple(np.clip(t, config.tau_min, config.tau_max) for t in tau)
    return PheromoneState(tau, config.tau_min, config.tau_max)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    iteration_best_cost: float
    best_cost: float
    iteration_best: dict


@dataclass
class OptimizeResult:
    best_assignment: dict
    best_cost: float
    history: list[IterationRecord] = field(default_factory=list)
    evaluations: int = 0


def optimize(space: DesignSpace, objective: Objective, config: AcoConfig | None = None,
             heuristic: Sequence[np.ndarray] | None = None,
             workers: int | None = None) -> OptimizeResult:
    config = config or AcoConfig()
    workers = worker_count() if workers is None else max(1, workers)
    pheromone = PheromoneState.initial(space, config)
    iterations = 1 if space.size == 1 else config.iterations
    cache: dict[tuple[int, ...], float] = {}
    best_choice, best_cost = None, math.inf
    history = []

    def evaluate(choice):
        return objective(space.assignment(choice))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for it in range(iterations):
            draws = iteration_rng(config.seed, it).random((config.n_ants, len(space.axes)))
            choices = [construct_solution(space, pheromone, heuristic, row,
                                          config.alpha, config.beta) for row in draws]
            todo = [c for c in dict.fromkeys(choices) if c not in cache]
            for c, cost in zip(todo, pool.map(evaluate, todo)):
                cache[c] = cost
            evaluated = [(c, cache[c]) for c in choices]
            it_choice, it_cost = min(evaluated, key=lambda e: e[1])
            if it_cost < best_cost:
                best_choice, best_cost = it_choice, it_cost
            history.append(IterationRecord(it + 1, it_cost, best_cost,
                                           space.assignment(it_choice)))
            pheromone = update_pheromone(pheromone, evaluated, config, objective.cost_offset)
    return OptimizeResult(space.assignment(best_choice), best_cost, history, len(cache))


# -- shortest path ----------------------------------------------------------

@dataclass(frozen=True)
class Graph:
    """Weighted directed graph; ``edges[u][v]`` is the weight of u -> v."""

    nodes: tuple
    edges: Mapping

    @classmethod
    def from_edges(cls, nodes, edges) -> "Graph":
        nodes = tuple(nodes)
        known = set(nodes)
        adj: dict = {n: {} for n in nodes}
        for e in edges:
            u, v, w = (e["from"], e["to"], e["weight"]) if isinstance(e, Mapping) else e
            for end in (u, v):
                if end not in known:
                    raise ValidationError(f"edge references unknown node {end!r}")
            w = float(w)
            if not (w > 0 and math.isfinite(w)):
                raise ValidationError(f"edge {u!r}->{v!r} weight must be > 0 (got {w})")
            adj[u][v] = w
        return cls(nodes, adj)

    def reachable(self, source) -> set:
        seen, stack = {source}, [source]
        while stack:
            for v in self.edges[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen


def load_graph_document(doc: Mapping) -> tuple[Graph, object, object]:
    """Parse ``{"nodes": [...], "edges": [{"from","to","weight"}], "source", "sink"}``."""
    try:
        graph = Graph.from_edges(doc["nodes"], doc["edges"])
        source, sink = doc["source"], doc["sink"]
    except KeyError as exc:
        raise ValidationError(f"graph document is missing {exc.args[0]!r}",
                              field=exc.args[0])
    except TypeError as exc:
        raise ValidationError(f"malformed graph document: {exc}")
    for name, node in (("source", source), ("sink", sink)):
        if node not in graph.edges:
            raise ValidationError(f"{name} {node!r} is not a node", field=name)
    return graph, source, sink


@dataclass
class PathResult:
    path: list
    length: float
    iterations_to_converge: int


def _erase_loops(path: list) -> list:
    out, pos = [], {}
    for node in path:
        if node in pos:
            for dropped in out[pos[node] + 1:]:
                del pos[dropped]
            del out[pos[node] + 1:]
        else:
            pos[node] = len(out)
            out.append(node)
    return out


def shortest_path_demo(graph: Graph, source, sink,
                       config: AcoConfig | None = None) -> PathResult:
    """Ants walk from ``source`` to ``sink``; trails live on edges.

    Visibility is ``1/weight``.  Ants only step onto nodes that can still
    reach the sink and prefer unvisited ones; any loop in a finished walk is
    erased before the path is scored.
    """
    config = config or DEMO_CONFIG
    if source not in graph.edges or sink not in graph.edges:
        raise ValidationError("source and sink must be graph nodes")
    if sink not in graph.reachable(source):
        raise ConnectivityError(f"sink {sink!r} is unreachable from source {source!r}")
    if source == sink:
        return PathResult([source], 0.0, 0)

    live = {u for u in graph.nodes if sink in graph.reachable(u)}
    succ = {u: [v for v in graph.edges[u] if v in live] for u in live}
    tau = {u: {v: config.tau_max for v in nbrs} for u, nbrs in graph.edges.items()}
    vis = {u: {v: (1.0 / w) ** config.beta for v, w in nbrs.items()}
           for u, nbrs in graph.edges.items()}
    max_steps = 4 * len(graph.nodes)
    best_path, best_len, converged_at = None, math.inf, 0

    for it in range(config.iterations):
        draws = iteration_rng(config.seed, it).random((config.n_ants, max_steps)).tolist()
        attract = {u: {v: tau[u][v] ** config.alpha * vis[u][v] for v in succ[u]}
                   for u in live}
        it_path, it_len = None, math.inf
        for row in draws:
            walk, node, visited = [source], source, {source}
            for u in row:
                here = attract[node]
                options = [v for v in here if v not in visited] or list(here)
                target = u * sum(here[v] for v in options)
                acc = 0.0
                nxt = options[-1]
                for v in options:
                    acc += here[v]
                    if target < acc:
                        nxt = v
                        break
                walk.append(nxt)
                visited.add(nxt)
                node = nxt
                if node == sink:
                    break
            if node != sink:
                continue
            path = _erase_loops(walk)
            length = sum(graph.edges[a][b] for a, b in zip(path, path[1:]))
            if length < it_len:
                it_path, it_len = path, length
        for u in tau:
            for v in tau[u]:
                tau[u][v] *= 1.0 - config.rho
        if it_path is not None:
            delta = config.q / it_len
            for u, v in zip(it_path, it_path[1:]):
                tau[u][v] += delta
            if it_len < best_len:
                best_path, best_len, converged_at = it_path, it_len, it + 1
        for u in tau:
            for v in tau[u]:
                tau[u][v] = min(config.tau_max, max(config.tau_min, tau[u][v]))

    if best_path is None:
        raise ConnectivityError("no ant reached the sink; raise iterations or n_ants")
    return PathResult(best_path, best_len, converged_at)
