#!/usr/bin/env python3
"""Fetch the real-world networks used by the dataset suite and convert them
into the plain edge-list format read by `mmdf`.

Every dataset ends up as three files in the cache directory:

    <name>.txt     one `src dst weight` record per undirected edge (1-based ids)
    <name>.labels  one display name per node (optional)
    <name>.truth   one 1-based community index per node (only when known)

Sources that are unreachable are reported and skipped; rerun once network
access is available. Les Miserables and the weighted karate club are exported
from the copies shipped with networkx when it is installed.

Usage: scripts/fetch_datasets.py [--cache datasets/cache] [--only name ...]
"""

import argparse
import gzip
import io
import re
import sys
import tarfile
import urllib.request
import zipfile
from pathlib import Path

KONECT = "http://konect.cc/files/download.tsv.{}.tar.bz2"
PAJEK_SLOVENE = "http://vlado.fmf.uni-lj.si/pub/networks/data/soc/Samo/Stranke94.net"
POLBLOGS = "http://zke.fas.harvard.edu/software/SCOREplus/Matlab/datasets/polblogs.mat"


def write_graph(cache, name, edges, labels=None, truth=None):
    cache.mkdir(parents=True, exist_ok=True)
    acc = {}
    for s, t, w in edges:
        if s == t:
            continue
        key = (min(s, t), max(s, t))
        acc[key] = acc.get(key, 0) + w
    with open(cache / f"{name}.txt", "w") as f:
        f.write(f"# {name}: {len(acc)} undirected weighted edges, 1-based ids\n")
        for (s, t), w in sorted(acc.items()):
            f.write(f"{s} {t} {repr(w) if isinstance(w, float) else w}\n")
    if labels is not None:
        (cache / f"{name}.labels").write_text("".join(f"{x}\n" for x in labels))
    if truth is not None:
        (cache / f"{name}.truth").write_text("".join(f"{x}\n" for x in truth))
    print(f"wrote {name}: {len(acc)} edges")


def download(url):
    with urllib.request.urlopen(url, timeout=30) as r:
        return r.read()


def konect_edges(code):
    """Read a KONECT tsv archive; returns (edges, n)."""
    raw = download(KONECT.format(code))
    import bz2

    tar = tarfile.open(fileobj=io.BytesIO(bz2.decompress(raw)))
    member = next(m for m in tar.getmembers() if Path(m.name).name.startswith("out."))
    edges = []
    for line in tar.extractfile(member).read().decode().splitlines():
        if not line.strip() or line.startswith("%"):
            continue
        parts = line.split()
        w = float(parts[2]) if len(parts) > 2 else 1.0
        edges.append((int(parts[0]), int(parts[1]), int(w) if w.is_integer() else w))
    return edges


def gahuku_gama(cache):
    edges = konect_edges("ucidata-gama")
    names = ["GAVEV", "KOTUN", "OVE", "ALIKA", "NAGAM", "GAHUK", "MASIL", "UKUDZ",
             "NOTOH", "KOHIK", "GEHAM", "ASARO", "UHETO", "SEUVE", "NAGAD", "GAMA"]
    # three alliance blocks of the balanced partition
    truth = [1, 1, 2, 2, 3, 2, 2, 2, 3, 3, 2, 2, 3, 3, 1, 1]
    # KONECT stores each undirected pair once; duplicates would double weights
    seen = {}
    for s, t, w in edges:
        seen[(min(s, t), max(s, t))] = w
    write_graph(cache, "gahuku_gama", [(s, t, w) for (s, t), w in seen.items()], names, truth)


def train_bombing(cache):
    write_graph(cache, "train_bombing", konect_edges("moreno_train"))


def slovene(cache):
    text = download(PAJEK_SLOVENE).decode("latin-1")
    names, edges, rows, section = [], [], [], None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("*"):
            section = line.split()[0].lower()
            continue
        if section == "*vertices":
            m = re.match(r'\d+\s+"([^"]*)"', line)
            names.append(m.group(1) if m else line.split()[1])
        elif section in ("*edges", "*arcs"):
            parts = line.split()
            edges.append((int(parts[0]), int(parts[1]), int(float(parts[2]))))
        elif section == "*matrix":
            rows.append([int(float(x)) for x in line.split()])
    for i, row in enumerate(rows):
        for j, w in enumerate(row):
            if w != 0:
                edges.append((i + 1, j + 1, w))
    # arcs and matrices list both directions of every pair; keep one copy
    sym = {}
    for s, t, w in edges:
        sym[(min(s, t), max(s, t))] = w
    write_graph(cache, "slovene_parliament", [(s, t, w) for (s, t), w in sym.items()], names)


def political_blogs(cache):
    from scipy.io import loadmat

    mat = loadmat(io.BytesIO(download(POLBLOGS)))
    a = mat["A"]
    labels = mat.get("label")
    a = (a + a.T).tocoo() if hasattr(a, "tocoo") else a
    edges = [(int(i) + 1, int(j) + 1, 1) for i, j in zip(a.row, a.col) if i < j]
    truth = [int(x) for x in labels.ravel()] if labels is not None else None
    write_graph(cache, "political_blogs", edges, truth=truth)


def les_miserables(cache):
    import networkx as nx

    g = nx.les_miserables_graph()
    index = {v: i + 1 for i, v in enumerate(g.nodes)}
    edges = [(index[u], index[v], int(d["weight"])) for u, v, d in g.edges(data=True)]
    write_graph(cache, "les_miserables", edges, list(g.nodes))


def karate_weighted(cache):
    import networkx as nx

    g = nx.karate_club_graph()
    edges = [(u + 1, v + 1, int(d["weight"])) for u, v, d in g.edges(data=True)]
    truth = [1 if g.nodes[v]["club"] == "Mr. Hi" else 2 for v in g.nodes]
    write_graph(cache, "karate_weighted", edges, [str(v + 1) for v in g.nodes], truth)


SOURCES = {
    "gahuku_gama": gahuku_gama,
    "slovene_parliament": slovene,
    "train_bombing": train_bombing,
    "les_miserables": les_miserables,
    "political_blogs": political_blogs,
    "karate_weighted": karate_weighted,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cache", default=str(Path(__file__).resolve().parent.parent / "datasets" / "cache"))
    ap.add_argument("--only", nargs="*", choices=sorted(SOURCES))
    args = ap.parse_args()
    cache = Path(args.cache)
    failed = []
    for name in args.only or SOURCES:
        try:
            SOURCES[name](cache)
        except Exception as e:  # noqa: BLE001
            failed.append(name)
            print(f"skip {name}: {e}", file=sys.stderr)
    if failed:
        print(f"{len(failed)} dataset(s) unavailable: {', '.join(failed)}", file=sys.stderr)


if __name__ == "__main__":
    main()
