/** Adam training loop over per-graph steps, plus frozen-model evaluation. */

import { GraphRecord, PreparedGraph, prepare } from "./data.js";
import { ModelConfig, ModelParams, forward, initModel, parameters } from "./model.js";
import { Rng } from "./rng.js";
import { Tape, Tensor } from "./tensor.js";

export interface TrainConfig {
  model: ModelConfig;
  epochs: number;
  learningRate: number;
  seed: number;
  targetTrainMse: number; // early stop once the epoch mean drops below this
}

export const DEFAULT_TRAIN: Omit<TrainConfig, "model"> = {
  epochs: 60,
  learningRate: 1e-3,
  seed: 0,
  targetTrainMse: 0.09,
};

class Adam {
  private m: Float64Array[];
  private v: Float64Array[];
  private t = 0;

  constructor(private params: Tensor[], private lr: number,
              private beta1 = 0.9, private beta2 = 0.999, private eps = 1e-8) {
    this.m = params.map((p) => new Float64Array(p.size));
    this.v = params.map((p) => new Float64Array(p.size));
  }

  step(): void {
    this.t++;
    const bc1 = 1 - Math.pow(this.beta1, this.t);
    const bc2 = 1 - Math.pow(this.beta2, this.t);
    for (let p = 0; p < this.params.length; p++) {
      const data = this.params[p].data;
      const grad = this.params[p].grad!;
      const m = this.m[p];
      const v = this.v[p];
      for (let i = 0; i < data.length; i++) {
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * grad[i];
        v[i] = this.beta2 * v[i] + (1 - this.beta2) * grad[i] * grad[i];
        data[i] -= (this.lr * (m[i] / bc1)) / (Math.sqrt(v[i] / bc2) + this.eps);
      }
    }
  }

  zeroGrad(): void {
    for (const p of this.params) p.zeroGrad();
  }
}

export interface TrainResult {
  model: ModelParams;
  lossCurve: number[];  // epoch mean train MSE
  epochsRun: number;
}

export function trainModel(graphs: GraphRecord[], config: TrainConfig): TrainResult {
  const model = initModel(config.model, config.seed);
  const prepared = graphs.map((g) => prepare(g, config.model.numEdgeTypes));
  const params = parameters(model);
  const adam = new Adam(params, config.learningRate);
  const rng = new Rng(config.seed + 12345);
  const lossCurve: number[] = [];
  const order = prepared.map((_, i) => i);

  let epoch = 0;
  for (; epoch < config.epochs; epoch++) {
    rng.shuffle(order);
    let total = 0;
    for (const idx of order) {
      const tape = new Tape();
      adam.zeroGrad();
      const { loss } = forward(tape, model, prepared[idx]);
      const value = loss.data[0];
      if (!Number.isFinite(value)) {
        throw new Error(
          `training diverged: loss=${value} at epoch ${epoch}, graph ${prepared[idx].graphId} ` +
          `(lr=${config.learningRate}, seed=${config.seed})`,
        );
      }
      total += value;
      tape.backward(loss);
      adam.step();
    }
    const mean = total / prepared.length;
    lossCurve.push(mean);
    if (mean <= config.targetTrainMse) {
      epoch++;
      break;
    }
  }
  return { model, lossCurve, epochsRun: epoch };
}

/** Mean MSE of a frozen model over a dataset. */
export function evaluateModel(graphs: GraphRecord[], model: ModelParams): { loss: number; perGraph: [string, number][] } {
  const perGraph: [string, number][] = [];
  let total = 0;
  for (const g of graphs) {
    const tape = new Tape();
    const { loss } = forward(tape, model, prepare(g, model.config.numEdgeTypes));
    perGraph.push([g.graphId, loss.data[0]]);
    total += loss.data[0];
  }
  return { loss: total / graphs.length, perGraph };
}
