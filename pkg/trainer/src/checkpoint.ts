/** Checkpoint (de)serialization: JSON with flattened parameter arrays. */

import { readFileSync, writeFileSync } from "node:fs";

import { ModelConfig, ModelParams, initModel, parameters } from "./model.js";

export interface CheckpointMeta {
  trainedOn?: string;
  epochsRun?: number;
  lossCurve?: number[];
  trainMse?: number;
  testMse?: number;
  seed?: number;
  learningRate?: number;
}

export function saveCheckpoint(path: string, model: ModelParams, meta: CheckpointMeta = {}): void {
  const payload = {
    format: "toygt-checkpoint-v1",
    config: model.config,
    meta,
    params: parameters(model).map((p) => Array.from(p.data)),
  };
  writeFileSync(path, JSON.stringify(payload));
}

export function loadCheckpoint(path: string): { model: ModelParams; meta: CheckpointMeta } {
  const payload = JSON.parse(readFileSync(path, "utf-8"));
  if (payload.format !== "toygt-checkpoint-v1") {
    throw new Error(`${path}: not a toygt checkpoint`);
  }
  const config = payload.config as ModelConfig;
  const model = initModel(config, 0);
  const params = parameters(model);
  if (payload.params.length !== params.length) {
    throw new Error(`${path}: checkpoint has ${payload.params.length} tensors, model needs ${params.length}`);
  }
  params.forEach((p, i) => {
    const values = payload.params[i] as number[];
    if (values.length !== p.size) {
      throw new Error(`${path}: tensor ${i} has ${values.length} values, expected ${p.size}`);
    }
    p.data.set(values);
  });
  return { model, meta: payload.meta ?? {} };
}
