#!/usr/bin/env python3
"""Search two-piece piecewise-linear self-maps of [0, 3] for one that is
generalized hybrid for some (alpha, beta) != (1, 0) but not nonexpansive.

Candidates are tried in a fixed order and the first hit is written as JSON.
Both inequalities are checked on a dense grid that contains the breakpoint
and points just to its right.
"""

import argparse
import itertools
import json
import sys

import numpy as np

LO, HI = 0.0, 3.0
BREAKS = [2.0, 1.5, 1.0, 2.5]
SLOPES = [0.0, 0.5, -0.5]
INTERCEPTS = [0.0, 0.5, 1.0, 1.5, 2.0]
PARAMS = [(2.0, 1.0), (1.5, 0.5), (0.5, 0.0), (0.0, 0.0), (1.0, 0.5), (0.5, 0.5), (2.0, 0.5), (1.5, 1.0)]


def evaluate(pieces, t):
    out = np.empty_like(t)
    done = np.zeros(t.shape, dtype=bool)
    for lo, hi, slope, icpt in pieces:  # first matching piece wins
        m = (t >= lo) & (t <= hi) & ~done
        out[m] = slope * t[m] + icpt
        done |= m
    return out


def grid(breaks, n=601):
    pts = np.linspace(LO, HI, n)
    extra = [b + d for b in breaks for d in (0.0, 1e-9, 1e-3)]
    pts = np.unique(np.concatenate([pts, [p for p in extra if LO <= p <= HI]]))
    return pts


def hybrid_violation(pieces, alpha, beta, pts):
    x = pts[:, None]
    y = pts[None, :]
    tx = evaluate(pieces, pts)[:, None]
    ty = evaluate(pieces, pts)[None, :]
    lhs = alpha * (tx - ty) ** 2 + (1 - alpha) * (x - ty) ** 2
    rhs = beta * (tx - y) ** 2 + (1 - beta) * (x - y) ** 2
    return float(np.max(lhs - rhs))


def expansion(pieces, pts):
    t = evaluate(pieces, pts)
    return float(np.max(np.abs(t[:, None] - t[None, :]) - np.abs(pts[:, None] - pts[None, :])))


def candidates():
    for b in BREAKS:
        for s1, c1, s2, c2 in itertools.product(SLOPES, INTERCEPTS, SLOPES, INTERCEPTS):
            pieces = [(LO, b, s1, c1), (b, HI, s2, c2)]
            ends = evaluate(pieces, np.array([LO, b, b + 1e-12, HI]))
            if np.all((ends >= LO) & (ends <= HI)):
                yield pieces


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-o", "--output", default="-")
    ap.add_argument("--min-expansion", type=float, default=0.5)
    args = ap.parse_args()

    tried = 0
    for pieces in candidates():
        pts = grid([p[1] for p in pieces[:-1]])
        gap = expansion(pieces, pts)
        if gap < args.min_expansion:
            continue
        for alpha, beta in PARAMS:
            tried += 1
            if hybrid_violation(pieces, alpha, beta, pts) <= 1e-12:
                fixture = {
                    "mapping": {
                        "kind": "piecewise-linear",
                        "pieces": [{"lower": lo, "upper": hi, "slope": s, "intercept": c} for lo, hi, s, c in pieces],
                    },
                    "alpha": alpha,
                    "beta": beta,
                    "grid": {"lower": LO, "upper": HI, "points": 100},
                    "start": [2.5],
                    "search": {"candidates_tried": tried, "check_grid_points": int(pts.size), "expansion": gap},
                }
                text = json.dumps(fixture, indent=2) + "\n"
                if args.output == "-":
                    sys.stdout.write(text)
                else:
                    with open(args.output, "w") as f:
                        f.write(text)
                return 0
    print("no candidate found", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
