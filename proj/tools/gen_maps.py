#!/usr/bin/env python3
"""Writes the bundled maps (.map, .graph, .sources) into data/maps."""

import math
import sys
from pathlib import Path


class Grid:
    def __init__(self, width_m, height_m, mpc):
        self.mpc = mpc
        self.w = round(width_m / mpc)
        self.h = round(height_m / mpc)
        self.cells = [[False] * self.w for _ in range(self.h)]
        self.rect(0, 0, width_m, mpc)
        self.rect(0, height_m - mpc, width_m, height_m)
        self.rect(0, 0, mpc, height_m)
        self.rect(width_m - mpc, 0, width_m, height_m)

    def _span(self, a, b, n):
        lo = max(0, int(math.floor(a / self.mpc + 1e-9)))
        hi = min(n, int(math.ceil(b / self.mpc - 1e-9)))
        return range(lo, hi)

    def rect(self, x0, y0, x1, y1, fill=True):
        for r in self._span(y0, y1, self.h):
            for c in self._span(x0, x1, self.w):
                self.cells[r][c] = fill

    def hwall(self, y, x0, x1, doors=()):
        self.rect(x0, y, x1, y + self.mpc)
        for a, b in doors:
            self.rect(a, y, b, y + self.mpc, fill=False)

    def vwall(self, x, y0, y1, doors=()):
        self.rect(x, y0, x + self.mpc, y1)
        for a, b in doors:
            self.rect(x, a, x + self.mpc, b, fill=False)

    def text(self):
        rows = ["".join("#" if v else "." for v in row) for row in self.cells]
        return f"mpc {self.mpc}\n{self.w} {self.h}\n" + "\n".join(rows) + "\n"


def write(out, name, grid, nodes, edges, sources, comment):
    (out / f"{name}.map").write_text(grid.text())
    lines = [f"// {comment}"]
    lines += [f"node {i} {x:.2f} {y:.2f}" for i, (x, y) in enumerate(nodes)]
    lines += [f"edge {a} {b}" for a, b in edges]
    (out / f"{name}.graph").write_text("\n".join(lines) + "\n")
    (out / f"{name}.sources").write_text("".join(f"source {x:.2f} {y:.2f}\n" for x, y in sources))


def loop(n):
    return [(i, (i + 1) % n) for i in range(n)]


def desk(out):
    # 20 x 12 m hall, perimeter patrol loop, desk blocks in the interior.
    g = Grid(20.0, 12.0, 0.2)
    g.rect(6.0, 5.4, 8.0, 6.2)
    g.rect(12.0, 5.4, 14.0, 6.2)
    g.rect(9.6, 8.0, 10.4, 10.0)
    g.rect(9.6, 2.0, 10.4, 4.0)
    nodes = [(1.5, 1.5), (6.0, 1.5), (14.0, 1.5), (18.5, 1.5), (18.5, 6.0),
             (18.5, 10.5), (14.0, 10.5), (6.0, 10.5), (1.5, 10.5), (1.5, 6.0)]
    sources = [(4.5, 4.5), (15.5, 8.0), (11.5, 4.0)]
    write(out, "desk", g, nodes, loop(len(nodes)), sources, "desk-scale hall, perimeter loop")


def cumberland(out):
    # 30 x 20 m floor: two rows of rooms off a central corridor.
    g = Grid(30.0, 20.0, 0.2)
    g.hwall(8.0, 0, 30, doors=[(3.0, 4.2), (10.0, 11.2), (18.0, 19.2), (25.0, 26.2)])
    g.hwall(12.0, 0, 30, doors=[(5.0, 6.2), (13.0, 14.2), (21.0, 22.2), (27.0, 28.2)])
    for x in (7.5, 15.0, 22.5):
        g.vwall(x, 0, 8.0)
        g.vwall(x, 12.2, 20)
    g.rect(2.0, 2.0, 3.0, 4.0)
    g.rect(17.0, 15.0, 19.0, 16.0)
    nodes = [(2.0, 10.0), (8.0, 10.0), (14.0, 10.0), (20.0, 10.0), (28.0, 10.0),
             (3.6, 6.0), (10.6, 6.0), (18.6, 6.0), (25.6, 6.0),
             (5.6, 14.0), (13.6, 14.0), (21.6, 14.0), (27.6, 14.0)]
    edges = [(0, 1), (1, 2), (2, 3), (3, 4),
             (0, 5), (1, 6), (2, 7), (3, 8), (1, 9), (2, 10), (3, 11), (4, 12)]
    sources = [(4.0, 2.0), (19.0, 3.0), (25.0, 17.5)]
    write(out, "cumberland", g, nodes, edges, sources, "corridor with rooms on both sides")


def office(out):
    # 36 x 24 m office: ring corridor around a core, rooms outside it.
    g = Grid(36.0, 24.0, 0.2)
    g.rect(12.0, 9.0, 24.0, 15.0)
    g.hwall(5.0, 0, 36, doors=[(4.0, 5.2), (16.0, 17.2), (30.0, 31.2)])
    g.hwall(19.0, 0, 36, doors=[(6.0, 7.2), (20.0, 21.2), (32.0, 33.2)])
    g.vwall(6.0, 5.2, 19.0, doors=[(11.0, 12.2)])
    g.vwall(30.0, 5.2, 19.0, doors=[(11.5, 12.7)])
    g.vwall(12.0, 0, 5.0)
    g.vwall(24.0, 19.2, 24.0)
    nodes = [(9.0, 7.0), (18.0, 7.0), (27.0, 7.0), (27.0, 12.0), (27.0, 17.0),
             (18.0, 17.0), (9.0, 17.0), (9.0, 12.0),
             (4.6, 2.5), (16.6, 2.5), (30.6, 2.5), (6.6, 21.5), (20.6, 21.5), (32.6, 21.5),
             (3.0, 12.0), (33.0, 12.0)]
    edges = loop(8) + [(0, 8), (1, 9), (2, 10), (6, 11), (5, 12), (4, 13), (7, 14), (3, 15)]
    sources = [(9.0, 1.5), (2.5, 17.0), (34.0, 8.0)]
    write(out, "office", g, nodes, edges, sources, "ring corridor, perimeter rooms")


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "maps"
    out.mkdir(parents=True, exist_ok=True)
    desk(out)
    cumberland(out)
    office(out)


if __name__ == "__main__":
    main()
