#!/usr/bin/env node
/**
 * toygt: train / export / eval for the barbell signal-reconstruction task.
 *
 *   toygt train  --data DIR [--out ckpt.json] [--epochs N] [--lr F]
 *                [--hidden N] [--heads N] [--layers N] [--seed N]
 *                [--target-train-mse F]
 *   toygt export --ckpt ckpt.json --data graphs.jsonl --out acts.jsonl
 *   toygt eval   --ckpt ckpt.json --data graphs.jsonl --out eval.json
 *                [--variant baseline|prune_A|prune_B|prune_C]
 *
 * All file formats are the ones shared with the analysis toolkit: graphs
 * and activation logs as JSON Lines, evaluation reports as JSON objects
 * {variant, loss, per_graph}.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";

import { loadCheckpoint, saveCheckpoint } from "./checkpoint.js";
import { featureDim, loadGraphs } from "./data.js";
import { exportActivations } from "./export.js";
import { DEFAULT_CONFIG } from "./model.js";
import { DEFAULT_TRAIN, evaluateModel, trainModel } from "./train.js";

const VARIANTS = ["baseline", "prune_A", "prune_B", "prune_C"];

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new UsageError(`unexpected argument ${arg}`);
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) throw new UsageError(`flag ${arg} needs a value`);
    flags.set(arg.slice(2), value);
    i++;
  }
  return flags;
}

class UsageError extends Error {}

function need(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) throw new UsageError(`missing required flag --${name}`);
  return value;
}

function num(flags: Map<string, string>, name: string, fallback: number): number {
  const raw = flags.get(name);
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isFinite(value)) throw new UsageError(`--${name} expects a number, got ${raw}`);
  return value;
}

function cmdTrain(flags: Map<string, string>): void {
  const dataDir = need(flags, "data");
  const trainGraphs = loadGraphs(join(dataDir, "train.jsonl"));
  const testGraphs = loadGraphs(join(dataDir, "test.jsonl"));
  const config = {
    model: {
      ...DEFAULT_CONFIG,
      featureDim: featureDim(trainGraphs[0]),
      hidden: num(flags, "hidden", DEFAULT_CONFIG.hidden),
      heads: num(flags, "heads", DEFAULT_CONFIG.heads),
      layers: num(flags, "layers", DEFAULT_CONFIG.layers),
    },
    epochs: num(flags, "epochs", DEFAULT_TRAIN.epochs),
    learningRate: num(flags, "lr", DEFAULT_TRAIN.learningRate),
    seed: num(flags, "seed", DEFAULT_TRAIN.seed),
    targetTrainMse: num(flags, "target-train-mse", DEFAULT_TRAIN.targetTrainMse),
  };
  const result = trainModel(trainGraphs, config);
  const trainEval = evaluateModel(trainGraphs, result.model);
  const testEval = evaluateModel(testGraphs, result.model);
  const out = flags.get("out") ?? "ckpt.json";
  mkdirSync(dirname(out) || ".", { recursive: true });
  saveCheckpoint(out, result.model, {
    trainedOn: dataDir,
    epochsRun: result.epochsRun,
    lossCurve: result.lossCurve,
    trainMse: trainEval.loss,
    testMse: testEval.loss,
    seed: config.seed,
    learningRate: config.learningRate,
  });
  console.log(JSON.stringify({
    epochs_run: result.epochsRun,
    train_mse: trainEval.loss,
    test_mse: testEval.loss,
    checkpoint: out,
  }));
}

function cmdExport(flags: Map<string, string>): void {
  const { model } = loadCheckpoint(need(flags, "ckpt"));
  const graphs = loadGraphs(need(flags, "data"));
  const out = need(flags, "out");
  mkdirSync(dirname(out) || ".", { recursive: true });
  writeFileSync(out, exportActivations(graphs, model));
  console.log(JSON.stringify({ graphs: graphs.length, out }));
}

function cmdEval(flags: Map<string, string>): void {
  const { model } = loadCheckpoint(need(flags, "ckpt"));
  const graphs = loadGraphs(need(flags, "data"));
  const variant = flags.get("variant") ?? "baseline";
  if (!VARIANTS.includes(variant)) {
    throw new UsageError(`unknown variant ${variant} (expected one of ${VARIANTS.join(", ")})`);
  }
  const { loss, perGraph } = evaluateModel(graphs, model);
  const out = need(flags, "out");
  mkdirSync(dirname(out) || ".", { recursive: true });
  writeFileSync(out, JSON.stringify({
    variant,
    loss,
    per_graph: perGraph.map(([graphId, graphLoss]) => ({ graph_id: graphId, loss: graphLoss })),
  }, null, 2) + "\n");
  console.log(JSON.stringify({ variant, loss, graphs: graphs.length, out }));
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    const flags = parseFlags(rest);
    switch (command) {
      case "train":
        cmdTrain(flags);
        return 0;
      case "export":
        cmdExport(flags);
        return 0;
      case "eval":
        cmdEval(flags);
        return 0;
      default:
        throw new UsageError(`unknown command ${command ?? "(none)"}; expected train, export or eval`);
    }
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`toygt: ${err.message}`);
      return 64;
    }
    console.error(`toygt: error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
