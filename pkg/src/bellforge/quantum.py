"""Quantum values of full-correlation Bell expressions for qubit observables.

Each observable is ``n . sigma`` for a unit Bloch vector ``n``.  For a fixed
state the expression is linear in every single Bloch vector, so the best
vector given all others is the normalised gradient; the see-saw sweeps over
parties with that update and, when the state is free, follows each sweep
with the principal eigenvector of the Bell operator.

Floating point starts here: exact coefficients are converted once.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import BellInequality, ShapeError, Vertex

MAX_QUBITS = 5
NORM_TOL = 1e-12

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class GHZ:
    n: int

    def vector(self) -> np.ndarray:
        psi = np.zeros(2**self.n, dtype=complex)
        psi[0] = psi[-1] = 1 / np.sqrt(2)
        return psi


def MaxEntangled2() -> GHZ:
    """``(|00> + |11>) / sqrt(2)``."""
    return GHZ(2)


@dataclass(frozen=True)
class ExplicitPure:
    amplitudes: tuple

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(len(amp)))) if len(amp) else 0
        if len(amp) < 2 or 2**n != len(amp):
            raise ShapeError(f"state needs 2**n amplitudes, got {len(amp)}")
        if abs(np.linalg.norm(amp) - 1) > NORM_TOL:
            raise ShapeError(f"state is not normalised (norm {np.linalg.norm(amp)})")
        object.__setattr__(self, "amplitudes", tuple(amp))

    @property
    def n(self) -> int:
        return int(round(np.log2(len(self.amplitudes))))

    def vector(self) -> np.ndarray:
        return np.asarray(self.amplitudes, dtype=complex)


@dataclass(frozen=True)
class Optimize:
    """The state is optimised together with the observables."""


def _check_qubits(n):
    if n > MAX_QUBITS:
        raise ShapeError(f"at most {MAX_QUBITS} parties supported, got {n}")


def _state_vector(state, n_parties) -> np.ndarray:
    if isinstance(state, Optimize):
        raise ShapeError("an optimised state has no fixed correlation tensor")
    if state.n != n_parties:
        raise ShapeError(f"state has {state.n} qubits but the inequality has {n_parties} parties")
    return state.vector()


@dataclass(frozen=True)
class ObservableSet:
    """Per party, an ``(m, 3)`` array of unit Bloch vectors."""

    vectors: tuple

    def __post_init__(self):
        vecs = tuple(np.array(v, dtype=float).reshape(-1, 3) for v in self.vectors)
        for v in vecs:
            norms = np.linalg.norm(v, axis=1)
            if np.any(np.abs(norms - 1) > NORM_TOL):
                raise ShapeError(f"Bloch vectors must have unit norm, got {norms}")
        object.__setattr__(self, "vectors", vecs)

    @property
    def settings(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.vectors)

    @classmethod
    def from_vertex(cls, v: Vertex) -> "ObservableSet":
        """``+-z`` observables reproducing a deterministic assignment on ``|0...0>``."""
        return cls(tuple(np.outer(vec, [0.0, 0.0, 1.0]) for vec in v.per_party))

    @classmethod
    def random(cls, settings, rng: np.random.Generator) -> "ObservableSet":
        out = []
        for m in settings:
            g = rng.normal(size=(m, 3))
            out.append(g / np.linalg.norm(g, axis=1, keepdims=True))
        return cls(tuple(out))

    def operators(self, party: int) -> np.ndarray:
        return np.einsum("ia,ajk->ijk", self.vectors[party], PAULI)

    def to_json(self):
        return [[[round(float(x), 6) for x in vec] for vec in party] for party in self.vectors]


def correlation_tensor(state, n_parties: int) -> np.ndarray:
    """``T[a_1..a_n] = <psi| sigma_{a_1} x ... x sigma_{a_n} |psi>`` over axes x, y, z."""
    _check_qubits(n_parties)
    psi = _state_vector(state, n_parties).reshape((2,) * n_parties)
    rows = _LETTERS[:n_parties]
    cols = _LETTERS[n_parties:2 * n_parties]
    axes = _LETTERS[2 * n_parties:3 * n_parties]
    subscripts = ",".join([rows] + [axes[p] + rows[p] + cols[p] for p in range(n_parties)] + [cols])
    T = np.einsum(subscripts + "->" + axes, psi.conj(), *([PAULI] * n_parties), psi, optimize=True)
    return np.real(T)


def _coefficient_array(ineq: BellInequality) -> np.ndarray:
    return np.array([float(c) for c in ineq.coeffs]).reshape(ineq.scenario.settings)


def _check_obs(ineq, obs):
    if obs.settings != ineq.scenario.settings:
        raise ShapeError(
            f"observables for settings {obs.settings} do not match {ineq.scenario.settings}"
        )


def _contract(F, T, vecs, skip=None):
    """Contract ``F`` and ``T`` with every party's Bloch vectors except ``skip``."""
    n = F.ndim
    s_idx, a_idx = _LETTERS[:n], _LETTERS[n:2 * n]
    operands = [F, T]
    terms = [s_idx, a_idx]
    for p in range(n):
        if p != skip:
            operands.append(vecs[p])
            terms.append(s_idx[p] + a_idx[p])
    out = "" if skip is None else s_idx[skip] + a_idx[skip]
    return np.einsum(",".join(terms) + "->" + out, *operands, optimize=True)


def quantum_value(ineq: BellInequality, obs: ObservableSet, state) -> float:
    """Mean value of the Bell operator in a fixed pure state."""
    _check_obs(ineq, obs)
    T = correlation_tensor(state, ineq.scenario.n_parties)
    return float(_contract(_coefficient_array(ineq), T, obs.vectors))


def bell_operator(ineq: BellInequality, obs: ObservableSet) -> np.ndarray:
    """``sum_idx F[idx] (n_{0,i_0}.sigma) x ... x (n_{p,i_p}.sigma)`` as a dense matrix."""
    _check_obs(ineq, obs)
    n = ineq.scenario.n_parties
    _check_qubits(n)
    s_idx = _LETTERS[:n]
    r_idx = _LETTERS[n:2 * n]
    c_idx = _LETTERS[2 * n:3 * n]
    spec = ",".join([s_idx] + [s_idx[p] + r_idx[p] + c_idx[p] for p in range(n)])
    ops = [obs.operators(p) for p in range(n)]
    B = np.einsum(spec + "->" + r_idx + c_idx, _coefficient_array(ineq), *ops, optimize=True)
    return B.reshape(2**n, 2**n)


@dataclass(frozen=True)
class SeesawConfig:
    restarts: int = 64
    max_iters: int = 500
    tol: float = 1e-10
    seed: int = 0
    threads: int = 1
    classical_start: bool = True

    def to_json(self):
        return {
            "restarts": self.restarts,
            "max_iters": self.max_iters,
            "tol": self.tol,
            "seed": self.seed,
            "classical_start": self.classical_start,
        }


@dataclass
class ViolationResult:
    value: float
    ratio: float
    bound: float
    observables: ObservableSet
    state: np.ndarray
    iterations: int
    restarts_used: int
    converged: bool
    best_restart: int
    history: list = field(default_factory=list, repr=False)

    def to_json(self):
        return {
            "value": round(self.value, 6),
            "ratio": round(self.ratio, 6),
            "bound": round(self.bound, 6),
            "observables": self.observables.to_json(),
            "state": [[round(float(z.real), 6), round(float(z.imag), 6)] for z in self.state],
            "iterations": self.iterations,
            "converged": self.converged,
            "restarts_used": self.restarts_used,
            "best_restart": self.best_restart,
        }


def _principal(B):
    w, v = np.linalg.eigh(B)
    return float(w[-1]), v[:, -1]


def _run_restart(ineq, F, state, fixed_T, start: ObservableSet, config: SeesawConfig):
    """One coordinate-ascent run; returns (value, vecs, psi, iters, converged, history)."""
    n = F.ndim
    vecs = [v.copy() for v in start.vectors]
    optimize_state = isinstance(state, Optimize)

    if optimize_state:
        value, psi = _principal(bell_operator(ineq, ObservableSet(tuple(vecs))))
        T = correlation_tensor(ExplicitPure(tuple(psi / np.linalg.norm(psi))), n)
    else:
        psi = _state_vector(state, n)
        T = fixed_T
        value = float(_contract(F, T, vecs))
    history = [value]
    converged = False
    it = 0
    for it in range(1, config.max_iters + 1):
        prev = value
        for p in range(n):
            g = _contract(F, T, vecs, skip=p)
            norms = np.linalg.norm(g, axis=1)
            ok = norms > 1e-14
            vecs[p][ok] = g[ok] / norms[ok, None]
            value = float(np.sum(g * vecs[p]))
            history.append(value)
        if optimize_state:
            value, psi = _principal(bell_operator(ineq, ObservableSet(tuple(vecs))))
            psi = psi / np.linalg.norm(psi)
            T = correlation_tensor(ExplicitPure(tuple(psi)), n)
            history.append(value)
        if value - prev < config.tol:
            converged = True
            break
    return value, vecs, psi, it, converged, history


def _starts(ineq, config):
    """Classical-optimum start (all observables +-z) followed by seeded random starts."""
    from .polytope import check_validity

    starts = []
    if config.classical_start:
        starts.append(ObservableSet.from_vertex(check_validity(ineq).witness))
    for r in range(config.restarts):
        rng = np.random.default_rng([config.seed, r])
        starts.append(ObservableSet.random(ineq.scenario.settings, rng))
    return starts


def seesaw_maximize(ineq: BellInequality, state, config: SeesawConfig | None = None) -> ViolationResult:
    """Best see-saw value over a deterministic classical start plus random restarts."""
    config = config or SeesawConfig()
    n = ineq.scenario.n_parties
    _check_qubits(n)
    F = _coefficient_array(ineq)
    fixed_T = None if isinstance(state, Optimize) else correlation_tensor(state, n)

    starts = _starts(ineq, config)

    def run(start):
        return _run_restart(ineq, F, state, fixed_T, start, config)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]

    best_i = max(range(len(results)), key=lambda i: (results[i][0], -i))
    value, vecs, psi, iters, converged, history = results[best_i]
    bound = float(ineq.bound)
    return ViolationResult(
        value=value,
        ratio=value / bound,
        bound=bound,
        observables=ObservableSet(tuple(vecs)),
        state=np.asarray(psi),
        iterations=iters,
        restarts_used=len(results),
        converged=converged,
        best_restart=best_i,
        history=history,
    )


def all_histories(ineq, state, config=None):
    """Objective traces of every restart (for monotonicity checks)."""
    config = config or SeesawConfig()
    n = ineq.scenario.n_parties
    F = _coefficient_array(ineq)
    fixed_T = None if isinstance(state, Optimize) else correlation_tensor(state, n)
    return [_run_restart(ineq, F, state, fixed_T, s, config)[5] for s in _starts(ineq, config)]


def product_state(bits) -> ExplicitPure:
    """Computational basis state ``|b_1 ... b_n>``."""
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int("".join(str(int(b)) for b in bits), 2)] = 1
    return ExplicitPure(tuple(psi))


def state_from_json(doc) -> ExplicitPure:
    amps = doc["amplitudes"] if isinstance(doc, dict) else doc
    vals = []
    for a in amps:
        if isinstance(a, (list, tuple)):
            vals.append(complex(float(a[0]), float(a[1])))
        else:
            vals.append(complex(float(a)))
    return ExplicitPure(tuple(vals))

