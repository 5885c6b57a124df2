import numpy as np
import pytest


def random_convex_polygon(rng, n, scale=1.0, center=(0.0, 0.0), aspect=1.0):
    """Convex CCW polygon with ``n`` vertices on a (possibly stretched) ellipse."""
    while True:
        ang = np.sort(rng.uniform(0.0, 2.0 * np.pi, n))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
        if gaps.min() > 0.15 / n and gaps.max() < np.pi * 0.95:
            break
    rot = rng.uniform(0, np.pi)
    x = scale * np.cos(ang)
    y = scale * aspect * np.sin(ang)
    c, s = np.cos(rot), np.sin(rot)
    return np.column_stack([center[0] + c * x - s * y, center[1] + s * x + c * y])


def random_triangle(rng):
    while True:
        xy = rng.uniform(-1.0, 1.0, size=(3, 2))
        a = 0.5 * ((xy[1, 0] - xy[0, 0]) * (xy[2, 1] - xy[0, 1])
                   - (xy[2, 0] - xy[0, 0]) * (xy[1, 1] - xy[0, 1]))
        if abs(a) > 0.05:
            return xy if a > 0 else xy[::-1].copy()


def p1_stiffness(xy, k=1.0):
    """Linear triangle conduction stiffness."""
    M = np.column_stack([np.ones(3), xy])
    area = 0.5 * np.linalg.det(M)
    grads = np.linalg.inv(M)[1:]  # (2, 3) gradients of barycentric coordinates
    return k * area * grads.T @ grads


def cst_stiffness(xy, D):
    """Constant-strain triangle stiffness with interleaved DOFs."""
    M = np.column_stack([np.ones(3), xy])
    area = 0.5 * np.linalg.det(M)
    g = np.linalg.inv(M)[1:]
    B = np.zeros((3, 6))
    B[0, 0::2] = g[0]
    B[1, 1::2] = g[1]
    B[2, 0::2] = g[1]
    B[2, 1::2] = g[0]
    return area * B.T @ D @ B


def frob_rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one summary line per acceptance criterion, printed after the test run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
