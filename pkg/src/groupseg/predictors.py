"""Black-box predictors ``f: (N, T, D) -> (N,)``.

Built-in synthetic predictors have closed-form Shapley values and back the
attribution tests. ``ExternalPredictor`` talks to a user model running in a
child process over newline-delimited JSON:

    request:  {"id": <int>, "windows": [[[x_td, ...D], ...T], ...N]}
    reply:    {"id": <int>, "outputs": [y, ...N]}

One request line per batch, one reply line back, ``id`` echoed.
"""

from __future__ import annotations

import json
import logging
import queue
import subprocess
import sys
import threading
from typing import Sequence

import numpy as np

from .players import PlayerSet

__all__ = [
    "PredictorError",
    "ProtocolError",
    "PredictorTimeout",
    "LinearPredictor",
    "PlayerAdditivePredictor",
    "PlayerInteractionPredictor",
    "ExternalPredictor",
    "CountingPredictor",
    "build_predictor",
    "evaluate",
    "echo_child_command",
]

log = logging.getLogger(__name__)


class PredictorError(RuntimeError):
    """The predictor could not produce outputs."""


class ProtocolError(PredictorError):
    """The external process replied with something that breaks the protocol."""


class PredictorTimeout(PredictorError):
    pass


def _as_batch(windows) -> np.ndarray:
    x = np.asarray(windows, dtype=float)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3:
        raise ValueError(f"expected a batch of (T, D) windows, got shape {x.shape}")
    return x


class LinearPredictor:
    """``f(X) = sum_{t,d} W[t, d] * X[t, d]``."""

    concurrency_safe = True

    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.ndim != 2:
            raise ValueError("linear weights must be a (T, D) matrix")

    def __call__(self, windows) -> np.ndarray:
        x = _as_batch(windows)
        if x.shape[1:] != self.weights.shape:
            raise ValueError(f"window shape {x.shape[1:]} != weights {self.weights.shape}")
        return np.einsum("ntd,td->n", x, self.weights)

    def to_dict(self) -> dict:
        return {"kind": "linear", "weights": self.weights.tolist()}


class _PlayerTerms:
    """Shared helper: per-player mean deviation ``g_p(X) = mean_{cells of p}(X - mu)``."""

    def __init__(self, player_set: PlayerSet, mu):
        self.player_set = player_set
        self.mu = np.asarray(mu, dtype=float).ravel()
        if self.mu.shape[0] != player_set.D:
            raise ValueError(f"mu has {self.mu.shape[0]} entries, players have D={player_set.D}")
        n = len(player_set)
        # (T*D, |P|) averaging matrix: column p has 1/|p| on p's cells
        owner = player_set.owner.ravel()
        avg = np.zeros((owner.size, n))
        avg[np.arange(owner.size), owner] = 1.0
        avg /= avg.sum(axis=0, keepdims=True)
        self._avg = avg

    def g(self, windows) -> np.ndarray:
        x = _as_batch(windows)
        ps = self.player_set
        if x.shape[1:] != (ps.T, ps.D):
            raise ValueError(f"window shape {x.shape[1:]} != ({ps.T}, {ps.D})")
        dev = (x - self.mu).reshape(x.shape[0], -1)
        return dev @ self._avg


class PlayerAdditivePredictor:
    """``f(X) = sum_p w_p * g_p(X)``.

    Mean masking sets ``g_p`` to exactly zero for a masked player, so the exact
    Shapley value of player p is ``w_p * g_p(X)``.
    """

    concurrency_safe = True

    def __init__(self, weights, player_set: PlayerSet, mu):
        self.terms = _PlayerTerms(player_set, mu)
        self.weights = np.asarray(weights, dtype=float).ravel()
        if self.weights.shape[0] != len(player_set):
            raise ValueError(f"{self.weights.shape[0]} weights for {len(player_set)} players")

    def __call__(self, windows) -> np.ndarray:
        return self.terms.g(windows) @ self.weights

    def to_dict(self) -> dict:
        return {"kind": "player_additive", "weights": self.weights.tolist(),
                "players": self.terms.player_set.to_dict(), "mu": self.terms.mu.tolist()}


class PlayerInteractionPredictor:
    """``f(X) = sum_{(p, q)} c_pq * g_p(X) * g_q(X)`` over the given pairs."""

    concurrency_safe = True

    def __init__(self, pairs: Sequence[tuple[int, int]], payoffs, player_set: PlayerSet, mu):
        self.terms = _PlayerTerms(player_set, mu)
        self.pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
        self.payoffs = np.asarray(payoffs, dtype=float).ravel()
        if self.payoffs.shape[0] != self.pairs.shape[0]:
            raise ValueError("one payoff per pair required")
        if self.pairs.size and (self.pairs.min() < 0 or self.pairs.max() >= len(player_set)):
            raise ValueError("pair index out of range")

    def __call__(self, windows) -> np.ndarray:
        g = self.terms.g(windows)
        return (g[:, self.pairs[:, 0]] * g[:, self.pairs[:, 1]]) @ self.payoffs

    def to_dict(self) -> dict:
        return {"kind": "player_interaction", "pairs": self.pairs.tolist(),
                "payoffs": self.payoffs.tolist(),
                "players": self.terms.player_set.to_dict(), "mu": self.terms.mu.tolist()}


class CountingPredictor:
    """Wraps a predictor and counts individual window evaluations."""

    def __init__(self, predictor):
        self.predictor = predictor
        self.calls = 0
        self.batches = 0
        self.concurrency_safe = getattr(predictor, "concurrency_safe", False)

    def __call__(self, windows):
        out = self.predictor(windows)
        self.calls += len(out)
        self.batches += 1
        return out


class ExternalPredictor:
    """Model served by a child process speaking the JSON-line protocol.

    The child is started lazily. If it has exited when a request is sent, it is
    restarted once; a second failure raises ``PredictorError``. Calls are
    serialized through a lock.
    """

    concurrency_safe = False

    def __init__(self, command: Sequence[str], env: dict | None = None, timeout: float = 30.0):
        if not command:
            raise ValueError("external predictor needs a command")
        self.command = list(command)
        self.env = env
        self.timeout = float(timeout)
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue | None = None
        self._next_id = 0
        self._lock = threading.Lock()

    def _start(self) -> None:
        self._proc = subprocess.Popen(
            self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL, text=True, encoding="utf-8", bufsize=1, env=self.env,
        )
        lines: queue.Queue = queue.Queue()

        def pump(stream, sink):
            for line in stream:
                sink.put(line)
            sink.put(None)

        threading.Thread(target=pump, args=(self._proc.stdout, lines), daemon=True).start()
        self._lines = lines

    def _alive(self) -> bool:
        return self._proc is not None and self._proc.poll() is None

    def _discard(self) -> None:
        """Drop a child that failed; its output stream is already finished."""
        proc, self._proc = self._proc, None
        if proc is None:
            return
        if proc.poll() is None:
            proc.kill()
        proc.wait()
        for stream in (proc.stdin, proc.stdout):
            try:
                stream.close()
            except (OSError, AttributeError):
                pass
        log.warning("external predictor exited (code %s), restarting", proc.returncode)

    def close(self) -> None:
        if self._proc is None:
            return
        try:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.wait(timeout=2)
        except (OSError, subprocess.TimeoutExpired):
            self._proc.kill()
            self._proc.wait()
        self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass

    def _roundtrip(self, payload: str, req_id: int) -> list:
        assert self._proc is not None and self._lines is not None
        self._proc.stdin.write(payload)
        self._proc.stdin.flush()
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            self._proc.kill()
            self._proc = None
            raise PredictorTimeout(f"no reply within {self.timeout} s") from None
        if line is None:
            raise BrokenPipeError("child process closed its output")
        try:
            reply = json.loads(line)
            outputs = reply["outputs"]
            rid = reply["id"]
        except (ValueError, KeyError, TypeError):
            raise ProtocolError(f"malformed reply line: {line.rstrip()!r}") from None
        if rid != req_id:
            raise ProtocolError(f"reply id {rid!r} does not match request id {req_id}: "
                                f"{line.rstrip()!r}")
        return outputs

    def __call__(self, windows) -> np.ndarray:
        x = _as_batch(windows) if np.asarray(windows).size else np.empty((0, 0, 0))
        with self._lock:
            req_id = self._next_id
            self._next_id += 1
            payload = json.dumps({"id": req_id, "windows": x.tolist()}, separators=(",", ":"))
            payload += "\n"
            outputs = None
            for attempt in range(2):
                if not self._alive():
                    if self._proc is not None:
                        self._discard()
                    self._start()
                try:
                    outputs = self._roundtrip(payload, req_id)
                    break
                except (BrokenPipeError, OSError) as err:
                    self._discard()
                    if attempt == 1:
                        raise PredictorError(f"external predictor failed twice: {err}") from err
        out = np.asarray(outputs, dtype=float).reshape(-1)
        if out.shape[0] != x.shape[0]:
            raise ProtocolError(f"expected {x.shape[0]} outputs, got {out.shape[0]}")
        if not np.all(np.isfinite(out)):
            raise ProtocolError("non-finite output in reply")
        return out

    def to_dict(self) -> dict:
        return {"kind": "external", "command": self.command, "env": self.env,
                "timeout": self.timeout}


def echo_child_command(mode: str = "sum") -> list[str]:
    """Command line of the bundled reference child (see ``groupseg.echo_child``)."""
    return [sys.executable, "-m", "groupseg.echo_child", "--mode", mode]


def build_predictor(spec: dict):
    """Construct a predictor from its JSON description."""
    kind = spec.get("kind")
    if kind == "linear":
        return LinearPredictor(spec["weights"])
    if kind in ("player_additive", "player_interaction"):
        players = PlayerSet.from_dict(spec["players"])
        if kind == "player_additive":
            return PlayerAdditivePredictor(spec["weights"], players, spec["mu"])
        return PlayerInteractionPredictor(spec["pairs"], spec["payoffs"], players, spec["mu"])
    if kind == "external":
        return ExternalPredictor(spec["command"], spec.get("env"), spec.get("timeout", 30.0))
    raise ValueError(f"unknown predictor kind {kind!r}")


def evaluate(predictor, windows) -> np.ndarray:
    """Evaluate ``predictor`` (an object or a spec dict) on a batch of windows."""
    if isinstance(predictor, dict):
        predictor = build_predictor(predictor)
    return np.asarray(predictor(windows), dtype=float)
