"""GraphViz DOT export of an e-graph.

Each canonical e-class becomes a ``cluster_<id>`` subgraph and each e-node a
box inside it.  An edge leaves the parent e-node and points at one node of
the child class, with ``lhead`` clipping the arrow at the cluster border.
"""

from __future__ import annotations

import json

from .egraph import EGraph


def _quote(s: str) -> str:
    return json.dumps(s)


def to_dot(g: EGraph, name: str = "egraph") -> str:
    if not g.clean:
        g.rebuild()
    ids = sorted(g.classes)
    node_name: dict = {}
    anchor: dict[int, str] = {}
    lines = [f"digraph {_quote(name)} {{", "  compound=true;", "  node [shape=box];"]
    for cid in ids:
        nodes = sorted(g.classes[cid].nodes)
        lines.append(f"  subgraph cluster_{cid} {{")
        lines.append(f"    label={_quote(str(cid))};")
        lines.append("    style=dotted;")
        for i, node in enumerate(nodes):
            nid = f"n{cid}_{i}"
            node_name[node] = nid
            anchor.setdefault(cid, nid)
            lines.append(f"    {nid} [label={_quote(g.node_head(node))}];")
        lines.append("  }")
    for cid in ids:
        for node in sorted(g.classes[cid].nodes):
            for slot, child in enumerate(node[2:]):
                child = g.find(child)
                lines.append(
                    f"  {node_name[node]} -> {anchor[child]} "
                    f"[lhead=cluster_{child}, label={_quote(str(slot + 1))}];"
                )
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(g: EGraph, path, name: str = "egraph") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_dot(g, name))
