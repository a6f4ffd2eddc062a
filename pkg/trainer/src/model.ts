/**
 * Local graph transformer: attention is restricted to structural edges
 * plus self-loops. Per layer, each node attends over its neighborhood
 * with scaled dot-product logits plus a learned additive bias per edge
 * type (so the type-3 bridge can be routed structurally when features are
 * topological), followed by a residual feed-forward block. The prediction
 * is a linear readout of the target node's final state, trained to
 * reconstruct the source node's signal vector.
 */

import { PreparedGraph } from "./data.js";
import { Rng } from "./rng.js";
import {
  Tape,
  Tensor,
  addGather,
  add,
  addRow,
  concatRows,
  gatherRows,
  layerNorm,
  leaf,
  matmul,
  matmulT,
  mse,
  param,
  relu,
  scale,
  softmaxRow,
} from "./tensor.js";

export interface ModelConfig {
  layers: number;
  hidden: number;
  heads: number;
  featureDim: number;
  numEdgeTypes: number; // structural type codes + 1 self-loop code
}

export const DEFAULT_CONFIG: ModelConfig = {
  layers: 3,
  hidden: 32,
  heads: 1,
  featureDim: 16,
  numEdgeTypes: 6,
};

export interface LayerParams {
  wq: Tensor[]; // per head: [hidden, headDim]
  wk: Tensor[];
  wv: Tensor[];
  wo: Tensor;   // [hidden, hidden]
  typeBias: Tensor[]; // per head: [1, numEdgeTypes]
  ln1g: Tensor; // pre-attention norm gain/bias
  ln1b: Tensor;
  ln2g: Tensor; // pre-FFN norm gain/bias
  ln2b: Tensor;
  ff1: Tensor;  // [hidden, 2*hidden]
  ff1b: Tensor; // [1, 2*hidden]
  ff2: Tensor;  // [2*hidden, hidden]
  ff2b: Tensor; // [1, hidden]
}

export interface ModelParams {
  config: ModelConfig;
  wIn: Tensor;  // [featureDim, hidden]
  layers: LayerParams[];
  lnFg: Tensor; // final norm before readout
  lnFb: Tensor;
  wOut: Tensor; // [hidden, featureDim]
}

function init(rng: Rng, rows: number, cols: number, std: number): Tensor {
  const values = new Float64Array(rows * cols);
  for (let i = 0; i < values.length; i++) values[i] = rng.normal() * std;
  return param(rows, cols, values);
}

export function initModel(config: ModelConfig, seed: number): ModelParams {
  if (config.hidden % config.heads !== 0) throw new Error("hidden must be divisible by heads");
  const rng = new Rng(seed * 2654435761 + 1);
  const d = config.hidden;
  const hd = d / config.heads;
  const layers: LayerParams[] = [];
  for (let l = 0; l < config.layers; l++) {
    layers.push({
      wq: Array.from({ length: config.heads }, () => init(rng, d, hd, 1 / Math.sqrt(d))),
      wk: Array.from({ length: config.heads }, () => init(rng, d, hd, 1 / Math.sqrt(d))),
      wv: Array.from({ length: config.heads }, () => init(rng, d, hd, 1 / Math.sqrt(d))),
      wo: init(rng, d, d, 1 / Math.sqrt(d)),
      typeBias: Array.from({ length: config.heads }, () => param(1, config.numEdgeTypes, new Float64Array(config.numEdgeTypes))),
      ln1g: param(1, d, new Float64Array(d).fill(1)),
      ln1b: param(1, d, new Float64Array(d)),
      ln2g: param(1, d, new Float64Array(d).fill(1)),
      ln2b: param(1, d, new Float64Array(d)),
      ff1: init(rng, d, 2 * d, 1 / Math.sqrt(d)),
      ff1b: param(1, 2 * d, new Float64Array(2 * d)),
      ff2: init(rng, 2 * d, d, 1 / Math.sqrt(2 * d)),
      ff2b: param(1, d, new Float64Array(d)),
    });
  }
  return {
    config,
    wIn: init(rng, config.featureDim, d, 1 / Math.sqrt(config.featureDim)),
    layers,
    lnFg: param(1, d, new Float64Array(d).fill(1)),
    lnFb: param(1, d, new Float64Array(d)),
    wOut: init(rng, d, config.featureDim, 1 / Math.sqrt(d)),
  };
}

export function parameters(model: ModelParams): Tensor[] {
  const out: Tensor[] = [model.wIn, model.lnFg, model.lnFb, model.wOut];
  for (const layer of model.layers) {
    out.push(...layer.wq, ...layer.wk, ...layer.wv, layer.wo, ...layer.typeBias,
             layer.ln1g, layer.ln1b, layer.ln2g, layer.ln2b,
             layer.ff1, layer.ff1b, layer.ff2, layer.ff2b);
  }
  return out;
}

/** One attention weight as exported to the activation-log format. */
export interface AttentionRecord {
  layer: number;
  head: number;
  src: number;
  dst: number;
  weight: number;
}

export interface ForwardResult {
  prediction: Tensor;        // [1, featureDim]
  loss: Tensor;              // [1, 1]
  attention: AttentionRecord[] | null;
}

export function forward(
  tape: Tape,
  model: ModelParams,
  g: PreparedGraph,
  recordAttention = false,
): ForwardResult {
  const { layers, heads } = model.config;
  const scaleFactor = 1 / Math.sqrt(model.config.hidden / heads);
  const records: AttentionRecord[] | null = recordAttention ? [] : null;

  const x = leaf(g.numNodes, model.config.featureDim);
  for (let v = 0; v < g.numNodes; v++) x.data.set(g.nodeFeatures[v], v * model.config.featureDim);
  let h = matmul(tape, x, model.wIn);

  for (let l = 0; l < layers; l++) {
    const lp = model.layers[l];
    const normed = layerNorm(tape, h, lp.ln1g, lp.ln1b);
    const rows: Tensor[] = [];
    for (let v = 0; v < g.numNodes; v++) {
      const nb = g.neighbors[v];
      const nbIdx = nb.map((n) => n.node);
      const nbTypes = nb.map((n) => n.edgeType);
      const hv = gatherRows(tape, h, [v]);
      const nv = gatherRows(tape, normed, [v]);
      const hnb = gatherRows(tape, normed, nbIdx);
      const headOut: Tensor[] = [];
      for (let head = 0; head < heads; head++) {
        const q = matmul(tape, nv, lp.wq[head]);            // [1, hd]
        const k = matmul(tape, hnb, lp.wk[head]);           // [m, hd]
        const vmat = matmul(tape, hnb, lp.wv[head]);        // [m, hd]
        const logits = addGather(tape, scale(tape, matmulT(tape, q, k), scaleFactor), lp.typeBias[head], nbTypes);
        const alpha = softmaxRow(tape, logits);             // [1, m]
        if (records) {
          for (let m = 0; m < nbIdx.length; m++) {
            records.push({ layer: l, head, src: v, dst: nbIdx[m], weight: alpha.data[m] });
          }
        }
        headOut.push(matmul(tape, alpha, vmat));            // [1, hd]
      }
      const msg = headOut.length === 1 ? headOut[0] : concatHeads(tape, headOut);
      rows.push(add(tape, hv, matmul(tape, msg, lp.wo)));
    }
    const attended = concatRows(tape, rows);
    const ffIn = layerNorm(tape, attended, lp.ln2g, lp.ln2b);
    const ff = matmul(tape, relu(tape, addRow(tape, matmul(tape, ffIn, lp.ff1), lp.ff1b)), lp.ff2);
    h = add(tape, attended, addRow(tape, ff, lp.ff2b));
  }

  h = layerNorm(tape, h, model.lnFg, model.lnFb);
  const target = gatherRows(tape, h, [g.roles.target]);
  const prediction = matmul(tape, target, model.wOut);
  const loss = mse(tape, prediction, g.y);
  return { prediction, loss, attention: records };
}

function concatHeads(tape: Tape, parts: Tensor[]): Tensor {
  // [1, hd] x heads -> [1, hidden]
  const cols = parts.reduce((acc, p) => acc + p.cols, 0);
  const joined = concatRows(tape, parts); // [heads, hd]
  // reshape [heads, hd] -> [1, heads*hd]: same memory layout
  const out = new Tensor(1, cols, joined.data, joined.requiresGrad);
  out.grad = joined.grad;
  return out;
}
