from __future__ import annotations

import http.server
import math
import threading
from pathlib import Path

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def record(name: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {name}" + (f" -- {detail}" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# -- independent oracles -----------------------------------------------------

def prim_mst_weights(x: np.ndarray) -> list[float]:
    """Prim's algorithm on the complete Euclidean graph, written without numpy tricks."""
    pts = [list(map(float, row)) for row in np.atleast_2d(x)]
    m = len(pts)
    if m <= 1:
        return []

    def dist(i, j):
        return math.sqrt(sum((a - b) ** 2 for a, b in zip(pts[i], pts[j])))

    in_tree = [False] * m
    best = [math.inf] * m
    best[0] = 0.0
    weights = []
    for _ in range(m):
        u = min((i for i in range(m) if not in_tree[i]), key=lambda i: best[i])
        in_tree[u] = True
        if u != 0:
            weights.append(best[u])
        for v in range(m):
            if not in_tree[v]:
                d = dist(u, v)
                if d < best[v]:
                    best[v] = d
    return sorted(weights)


def brute_force_wd(x, y, p: float) -> float:
    """Minimum over every partial matching of x into y; unmatched points go to the diagonal."""
    x = [tuple(map(float, r)) for r in x]
    y = [tuple(map(float, r)) for r in y]

    def diag(pt):
        return ((pt[1] - pt[0]) / 2.0) ** p

    def pair(a, b):
        return max(abs(a[0] - b[0]), abs(a[1] - b[1])) ** p

    best = math.inf

    def rec(i, used, acc):
        nonlocal best
        if acc >= best:
            return
        if i == len(x):
            total = acc + sum(diag(y[j]) for j in range(len(y)) if not used[j])
            best = min(best, total)
            return
        rec(i + 1, used, acc + diag(x[i]))
        for j in range(len(y)):
            if not used[j]:
                used[j] = True
                rec(i + 1, used, acc + pair(x[i], y[j]))
                used[j] = False

    rec(0, [False] * len(y), 0.0)
    return best ** (1.0 / p)


def random_diagram_points(rng: np.random.Generator, max_points: int = 6, h0: bool = False) -> np.ndarray:
    k = int(rng.integers(0, max_points + 1))
    births = np.zeros(k) if h0 else rng.uniform(0, 2, k)
    deaths = births + rng.uniform(0, 2, k)
    return np.column_stack([births, deaths])


# -- fixtures ----------------------------------------------------------------

@pytest.fixture
def four_points():
    return np.array([[1.0, 1.0], [1.5, 1.0], [1.5, 3.0], [4.0, 4.0]])


class _ScriptedHandler(http.server.BaseHTTPRequestHandler):
    routes: dict = {}

    def do_GET(self):  # noqa: N802
        symbol = self.path.split("?")[0].rstrip("/").split("/")[-1]
        status, body = self.routes.get(symbol, (404, b"not found"))
        self.send_response(status)
        self.send_header("Content-Type", "text/csv")
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def price_server():
    """Local HTTP server; assign ``routes[symbol] = (status, bytes)``."""
    routes: dict = {}
    handler = type("Handler", (_ScriptedHandler,), {"routes": routes})
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address
    yield f"http://{host}:{port}/{{symbol}}?period1={{period1}}&period2={{period2}}", routes
    server.shutdown()
    server.server_close()


@pytest.fixture
def write_csv(tmp_path: Path):
    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write
