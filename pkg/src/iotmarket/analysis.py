"""Shape diagnostics for sampled piecewise-linear curves."""

from __future__ import annotations

import numpy as np


def bend_points(x, y, atol: float = 1e-7) -> list[float]:
    """Approximate abscissae where a sampled piecewise-linear curve bends.

    A bend that falls strictly between grid points shows up as two adjacent
    slope changes around a mixed cell; such runs are merged into one bend.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slopes = np.diff(y) / np.diff(x)
    changed = np.flatnonzero(np.abs(np.diff(slopes)) > atol)
    bends: list[list[int]] = []
    for i in changed:
        if bends and i == bends[-1][-1] + 1:
            bends[-1].append(i)
        else:
            bends.append([i])
    # slope index i sits between cells i and i + 1, i.e. at x[i + 1]
    return [float(np.mean(x[np.asarray(run) + 1])) for run in bends]


def regime_slopes(x, y, atol: float = 1e-7) -> list[float]:
    """Slope of each linear piece, in order, skipping cells that straddle a bend."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slopes = np.diff(y) / np.diff(x)
    pieces = [[slopes[0]]]
    for a, b in zip(slopes, slopes[1:]):
        if abs(b - a) > atol:
            pieces.append([b])
        else:
            pieces[-1].append(b)
    # a straddling cell forms a one-cell piece between two real pieces
    keep = [p for i, p in enumerate(pieces) if len(p) > 1 or i in (0, len(pieces) - 1)]
    return [float(np.median(p)) for p in keep]


def is_nonincreasing(y, atol: float = 1e-12) -> bool:
    return bool(np.all(np.diff(np.asarray(y, dtype=float)) <= atol))


def is_nondecreasing(y, atol: float = 1e-12) -> bool:
    return bool(np.all(np.diff(np.asarray(y, dtype=float)) >= -atol))
