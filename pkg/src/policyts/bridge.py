"""Client for serving policy conditionals from an external process.

The protocol is newline-delimited JSON over the server's stdin/stdout:

* on startup the server writes one handshake record
  ``{"protocol_version": 1, "action_count": N, "is_markov": bool}``;
* the client writes request records
  ``{"id": k, "state": "<ASCII state serialization>"}`` (plus
  ``"trajectory": [action indices]`` when the server is not Markov);
* the server answers each request in order with
  ``{"id": k, "probs": [p0, ..., pN-1]}`` or ``{"id": k, "error": msg}``.

Requests are strictly synchronous (no pipelining): a best-first search
asks for conditionals once per expansion, so bridge traffic is one
round-trip per expanded node.  Responses must echo the request id and
carry ``action_count`` non-negative probabilities summing to 1 within
1e-6 (the client renormalizes inside that tolerance and rejects beyond
it).  Any violation, or the server exiting, raises
:class:`BridgeProtocolError`, which aborts the search run.
"""

from __future__ import annotations

import json
import select
import shlex
import subprocess
from typing import Callable, Sequence

from .core import Policy, PolicyTSError, TrajectoryNode

PROTOCOL_VERSION = 1
SUM_TOLERANCE = 1e-6


class BridgeProtocolError(PolicyTSError):
    """The policy server is unavailable or violated the protocol."""


class BridgePolicy(Policy):
    """Policy whose conditionals are fetched from a subprocess.

    ``render`` turns an environment state into the protocol's state
    serialization (for Sokoban, the level grid with the current boxes
    and player).  When the server declares itself Markov, responses are
    memoized by that serialization, so each distinct state costs one
    request.  One server process belongs to exactly one search client;
    close() (or use as a context manager) terminates it.
    """

    def __init__(
        self,
        command: str | Sequence[str],
        render: Callable[[object], str],
        *,
        expected_action_count: int | None = None,
        handshake_timeout: float = 5.0,
    ) -> None:
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        self._render = render
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise BridgeProtocolError(f"cannot launch policy server {argv!r}: {exc}") from exc
        handshake = self._read_handshake(handshake_timeout)
        if handshake.get("protocol_version") != PROTOCOL_VERSION:
            self._shutdown()
            raise BridgeProtocolError(
                f"unsupported protocol version {handshake.get('protocol_version')!r}"
            )
        try:
            self.action_count = int(handshake["action_count"])
            self.is_markov = bool(handshake["is_markov"])
        except (KeyError, TypeError, ValueError) as exc:
            self._shutdown()
            raise BridgeProtocolError(f"malformed handshake {handshake!r}") from exc
        if expected_action_count is not None and self.action_count != expected_action_count:
            self._shutdown()
            raise BridgeProtocolError(
                f"server action_count {self.action_count} != domain's "
                f"{expected_action_count}"
            )
        self._next_id = 0
        self._memo: dict[str, tuple[float, ...]] = {}

    def _read_handshake(self, timeout: float) -> dict:
        assert self._proc.stdout is not None
        ready, _, _ = select.select([self._proc.stdout], [], [], timeout)
        if not ready:
            self._shutdown()
            raise BridgeProtocolError(f"no handshake within {timeout} s")
        line = self._proc.stdout.readline()
        if not line:
            self._shutdown()
            raise BridgeProtocolError("server exited before handshake")
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            self._shutdown()
            raise BridgeProtocolError(f"handshake is not valid JSON: {line!r}") from exc

    def conditionals(self, node: TrajectoryNode) -> Sequence[float]:
        state_text = self._render(node.state)
        if self.is_markov:
            cached = self._memo.get(state_text)
            if cached is not None:
                return cached
        request: dict = {"id": self._next_id, "state": state_text}
        if not self.is_markov:
            request["trajectory"] = list(node.actions)
        self._next_id += 1
        probs = self._round_trip(request)
        if self.is_markov:
            self._memo[state_text] = probs
        return probs

    def _round_trip(self, request: dict) -> tuple[float, ...]:
        if self._proc.poll() is not None:
            raise BridgeProtocolError(
                f"policy server exited with code {self._proc.returncode}"
            )
        assert self._proc.stdin is not None and self._proc.stdout is not None
        try:
            self._proc.stdin.write(json.dumps(request) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BridgeProtocolError("policy server closed its input") from exc
        line = self._proc.stdout.readline()
        if not line:
            raise BridgeProtocolError("policy server closed its output mid-request")
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BridgeProtocolError(f"malformed response: {line!r}") from exc
        if response.get("id") != request["id"]:
            raise BridgeProtocolError(
                f"response id {response.get('id')!r} does not echo request id "
                f"{request['id']}"
            )
        if "error" in response:
            raise BridgeProtocolError(f"server error: {response['error']}")
        probs = response.get("probs")
        if not isinstance(probs, list) or len(probs) != self.action_count:
            raise BridgeProtocolError(
                f"expected {self.action_count} probabilities, got {probs!r}"
            )
        values = [float(p) for p in probs]
        if any(p < 0 for p in values):
            raise BridgeProtocolError(f"negative probability in {values}")
        total = sum(values)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise BridgeProtocolError(
                f"probabilities sum to {total}, beyond tolerance {SUM_TOLERANCE}"
            )
        return tuple(p / total for p in values)

    def _shutdown(self) -> None:
        proc = getattr(self, "_proc", None)
        if proc is None:
            return
        try:
            if proc.stdin is not None:
                proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=2.0)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()
        if proc.stdout is not None:
            proc.stdout.close()

    def close(self) -> None:
        self._shutdown()

    def __enter__(self) -> "BridgePolicy":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def bridge_policy(
    command: str | Sequence[str],
    render: Callable[[object], str],
    *,
    expected_action_count: int | None = None,
    handshake_timeout: float = 5.0,
) -> BridgePolicy:
    """Launch ``command`` as a policy server and wrap it as a Policy.

    Fails fast (raising :class:`BridgeProtocolError`) when the server
    cannot be launched, misses the handshake deadline, or declares an
    action count different from ``expected_action_count``.
    """
    return BridgePolicy(
        command,
        render,
        expected_action_count=expected_action_count,
        handshake_timeout=handshake_timeout,
    )
