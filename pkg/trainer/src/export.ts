/** Export post-softmax attention weights in the shared activation-log format. */

import { GraphRecord, featureDim, prepare } from "./data.js";
import { ModelParams, forward } from "./model.js";
import { Tape } from "./tensor.js";

/** One JSON line per graph: {graph_id, model, records: [...]}. */
export function exportActivations(graphs: GraphRecord[], model: ModelParams, modelName = "toygt"): string {
  const lines: string[] = [];
  for (const g of graphs) {
    if (featureDim(g) !== model.config.featureDim) {
      throw new Error(
        `graph ${g.graphId} has feature dim ${featureDim(g)}, model expects ${model.config.featureDim}`,
      );
    }
    const tape = new Tape();
    const { attention } = forward(tape, model, prepare(g, model.config.numEdgeTypes), true);
    const records = attention!.map((r) => ({
      layer: r.layer,
      head: r.head,
      src: r.src,
      dst: r.dst,
      weight: r.weight,
    }));
    lines.push(JSON.stringify({ graph_id: g.graphId, model: modelName, records }));
  }
  return lines.join("\n") + "\n";
}
