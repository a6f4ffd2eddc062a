/** Graph dataset I/O: the JSON Lines format shared with the analysis toolkit. */

import { readFileSync } from "node:fs";

export interface GraphRecord {
  graphId: string;
  numNodes: number;
  edges: [number, number][];
  nodeFeatures: number[][];
  edgeFeatures: number[];
  roles: { source: number; target: number; dummy_sources: number[] };
  y: number[];
}

export interface Neighbor {
  node: number;
  edgeType: number;
}

/** Adjacency with self-loops appended; self-loops get their own type code. */
export interface PreparedGraph extends GraphRecord {
  neighbors: Neighbor[][];
  selfLoopType: number;
}

export function loadGraphs(path: string): GraphRecord[] {
  const out: GraphRecord[] = [];
  const text = readFileSync(path, "utf-8");
  let lineno = 0;
  for (const line of text.split("\n")) {
    lineno++;
    if (!line.trim()) continue;
    let obj: any;
    try {
      obj = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${lineno}: malformed JSON`);
    }
    if (typeof obj.graph_id !== "string" || !Array.isArray(obj.edges)) {
      throw new Error(`${path}:${lineno}: not a graph record`);
    }
    if (!Array.isArray(obj.node_features) || !Array.isArray(obj.y) || !obj.roles) {
      throw new Error(`${path}:${lineno}: graph ${obj.graph_id} lacks features/roles/y (trainer needs a task dataset)`);
    }
    out.push({
      graphId: obj.graph_id,
      numNodes: obj.num_nodes,
      edges: obj.edges.map((e: number[]) => [e[0], e[1]] as [number, number]),
      nodeFeatures: obj.node_features,
      edgeFeatures: obj.edge_features ?? obj.edges.map(() => 0),
      roles: obj.roles,
      y: obj.y,
    });
  }
  if (out.length === 0) throw new Error(`${path}: empty dataset`);
  return out;
}

export function prepare(g: GraphRecord, numEdgeTypes: number): PreparedGraph {
  const neighbors: Neighbor[][] = Array.from({ length: g.numNodes }, () => []);
  g.edges.forEach(([i, j], k) => {
    const t = g.edgeFeatures[k];
    neighbors[i].push({ node: j, edgeType: t });
    neighbors[j].push({ node: i, edgeType: t });
  });
  const selfLoopType = numEdgeTypes - 1;
  for (let v = 0; v < g.numNodes; v++) {
    neighbors[v].push({ node: v, edgeType: selfLoopType });
    neighbors[v].sort((a, b) => a.node - b.node);
  }
  return { ...g, neighbors, selfLoopType };
}

export function featureDim(g: GraphRecord): number {
  return g.nodeFeatures[0]?.length ?? 0;
}
