/**
 * Minimal reverse-mode autograd over dense row-major float64 matrices.
 *
 * Each op appends its output to a tape; backward() walks the tape in
 * reverse creation order (which is always topological). Graphs here are
 * tiny (tens of nodes), so clarity beats batching.
 */

export class Tensor {
  data: Float64Array;
  grad: Float64Array | null = null;
  readonly rows: number;
  readonly cols: number;
  requiresGrad: boolean;
  backward: (() => void) | null = null;

  constructor(rows: number, cols: number, data?: Float64Array, requiresGrad = false) {
    this.rows = rows;
    this.cols = cols;
    this.data = data ?? new Float64Array(rows * cols);
    this.requiresGrad = requiresGrad;
  }

  get size(): number {
    return this.rows * this.cols;
  }

  ensureGrad(): Float64Array {
    if (!this.grad) this.grad = new Float64Array(this.size);
    return this.grad;
  }

  zeroGrad(): void {
    if (this.grad) this.grad.fill(0);
  }

  at(r: number, c: number): number {
    return this.data[r * this.cols + c];
  }
}

export class Tape {
  nodes: Tensor[] = [];

  track(t: Tensor): Tensor {
    this.nodes.push(t);
    return t;
  }

  /** Backpropagate from a scalar loss through everything on the tape. */
  backward(loss: Tensor): void {
    if (loss.size !== 1) throw new Error("backward expects a scalar loss");
    loss.ensureGrad()[0] = 1;
    for (let i = this.nodes.length - 1; i >= 0; i--) {
      const node = this.nodes[i];
      if (node.backward && node.grad) node.backward();
    }
  }

  reset(): void {
    this.nodes.length = 0;
  }
}

export function leaf(rows: number, cols: number, values?: ArrayLike<number>): Tensor {
  const t = new Tensor(rows, cols);
  if (values) t.data.set(values);
  return t;
}

export function param(rows: number, cols: number, values: ArrayLike<number>): Tensor {
  const t = new Tensor(rows, cols, Float64Array.from(values as ArrayLike<number>), true);
  t.ensureGrad();
  return t;
}

function result(tape: Tape, rows: number, cols: number, parents: Tensor[]): Tensor {
  const t = new Tensor(rows, cols);
  t.requiresGrad = parents.some((p) => p.requiresGrad);
  if (t.requiresGrad) t.ensureGrad();
  return tape.track(t);
}

/** C = A @ B */
export function matmul(tape: Tape, a: Tensor, b: Tensor): Tensor {
  if (a.cols !== b.rows) throw new Error(`matmul shape mismatch ${a.cols} vs ${b.rows}`);
  const out = result(tape, a.rows, b.cols, [a, b]);
  for (let i = 0; i < a.rows; i++) {
    for (let k = 0; k < a.cols; k++) {
      const av = a.data[i * a.cols + k];
      if (av === 0) continue;
      for (let j = 0; j < b.cols; j++) {
        out.data[i * b.cols + j] += av * b.data[k * b.cols + j];
      }
    }
  }
  out.backward = () => {
    const g = out.grad!;
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < a.rows; i++) {
        for (let k = 0; k < a.cols; k++) {
          let acc = 0;
          for (let j = 0; j < b.cols; j++) acc += g[i * b.cols + j] * b.data[k * b.cols + j];
          ga[i * a.cols + k] += acc;
        }
      }
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      for (let k = 0; k < b.rows; k++) {
        for (let i = 0; i < a.rows; i++) {
          const av = a.data[i * a.cols + k];
          if (av === 0) continue;
          for (let j = 0; j < b.cols; j++) gb[k * b.cols + j] += av * g[i * b.cols + j];
        }
      }
    }
  };
  return out;
}

/** C = A @ B^T */
export function matmulT(tape: Tape, a: Tensor, b: Tensor): Tensor {
  if (a.cols !== b.cols) throw new Error(`matmulT shape mismatch ${a.cols} vs ${b.cols}`);
  const out = result(tape, a.rows, b.rows, [a, b]);
  for (let i = 0; i < a.rows; i++) {
    for (let j = 0; j < b.rows; j++) {
      let acc = 0;
      for (let k = 0; k < a.cols; k++) acc += a.data[i * a.cols + k] * b.data[j * b.cols + k];
      out.data[i * b.rows + j] = acc;
    }
  }
  out.backward = () => {
    const g = out.grad!;
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < a.rows; i++) {
        for (let j = 0; j < b.rows; j++) {
          const gv = g[i * b.rows + j];
          if (gv === 0) continue;
          for (let k = 0; k < a.cols; k++) ga[i * a.cols + k] += gv * b.data[j * b.cols + k];
        }
      }
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      for (let j = 0; j < b.rows; j++) {
        for (let i = 0; i < a.rows; i++) {
          const gv = g[i * b.rows + j];
          if (gv === 0) continue;
          for (let k = 0; k < a.cols; k++) gb[j * b.cols + k] += gv * a.data[i * a.cols + k];
        }
      }
    }
  };
  return out;
}

export function add(tape: Tape, a: Tensor, b: Tensor): Tensor {
  if (a.rows !== b.rows || a.cols !== b.cols) throw new Error("add shape mismatch");
  const out = result(tape, a.rows, a.cols, [a, b]);
  for (let i = 0; i < a.size; i++) out.data[i] = a.data[i] + b.data[i];
  out.backward = () => {
    const g = out.grad!;
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < a.size; i++) ga[i] += g[i];
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      for (let i = 0; i < b.size; i++) gb[i] += g[i];
    }
  };
  return out;
}

/** Add a [1, cols] bias row to every row of A. */
export function addRow(tape: Tape, a: Tensor, bias: Tensor): Tensor {
  if (bias.rows !== 1 || bias.cols !== a.cols) throw new Error("addRow shape mismatch");
  const out = result(tape, a.rows, a.cols, [a, bias]);
  for (let i = 0; i < a.rows; i++) {
    for (let j = 0; j < a.cols; j++) out.data[i * a.cols + j] = a.data[i * a.cols + j] + bias.data[j];
  }
  out.backward = () => {
    const g = out.grad!;
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < a.size; i++) ga[i] += g[i];
    }
    if (bias.requiresGrad) {
      const gb = bias.ensureGrad();
      for (let i = 0; i < a.rows; i++) {
        for (let j = 0; j < a.cols; j++) gb[j] += g[i * a.cols + j];
      }
    }
  };
  return out;
}

export function scale(tape: Tape, a: Tensor, c: number): Tensor {
  const out = result(tape, a.rows, a.cols, [a]);
  for (let i = 0; i < a.size; i++) out.data[i] = a.data[i] * c;
  out.backward = () => {
    if (!a.requiresGrad) return;
    const g = out.grad!;
    const ga = a.ensureGrad();
    for (let i = 0; i < a.size; i++) ga[i] += g[i] * c;
  };
  return out;
}

export function relu(tape: Tape, a: Tensor): Tensor {
  const out = result(tape, a.rows, a.cols, [a]);
  for (let i = 0; i < a.size; i++) out.data[i] = a.data[i] > 0 ? a.data[i] : 0;
  out.backward = () => {
    if (!a.requiresGrad) return;
    const g = out.grad!;
    const ga = a.ensureGrad();
    for (let i = 0; i < a.size; i++) if (a.data[i] > 0) ga[i] += g[i];
  };
  return out;
}

/** Select rows of A by index; gradient scatter-adds back. */
export function gatherRows(tape: Tape, a: Tensor, indices: number[]): Tensor {
  const out = result(tape, indices.length, a.cols, [a]);
  for (let r = 0; r < indices.length; r++) {
    out.data.set(a.data.subarray(indices[r] * a.cols, (indices[r] + 1) * a.cols), r * a.cols);
  }
  out.backward = () => {
    if (!a.requiresGrad) return;
    const g = out.grad!;
    const ga = a.ensureGrad();
    for (let r = 0; r < indices.length; r++) {
      const base = indices[r] * a.cols;
      for (let j = 0; j < a.cols; j++) ga[base + j] += g[r * a.cols + j];
    }
  };
  return out;
}

/** Stack [1, cols] rows into one [n, cols] tensor. */
export function concatRows(tape: Tape, parts: Tensor[]): Tensor {
  const cols = parts[0].cols;
  const out = result(tape, parts.length, cols, parts);
  for (let r = 0; r < parts.length; r++) {
    if (parts[r].rows !== 1 || parts[r].cols !== cols) throw new Error("concatRows expects [1, cols] parts");
    out.data.set(parts[r].data, r * cols);
  }
  out.backward = () => {
    const g = out.grad!;
    for (let r = 0; r < parts.length; r++) {
      const p = parts[r];
      if (!p.requiresGrad) continue;
      const gp = p.ensureGrad();
      for (let j = 0; j < cols; j++) gp[j] += g[r * cols + j];
    }
  };
  return out;
}

/** Add entries of a [1, T] table, selected per column: out[j] = a[j] + table[idx[j]]. */
export function addGather(tape: Tape, a: Tensor, table: Tensor, indices: number[]): Tensor {
  if (a.rows !== 1 || table.rows !== 1 || indices.length !== a.cols) throw new Error("addGather shape mismatch");
  const out = result(tape, 1, a.cols, [a, table]);
  for (let j = 0; j < a.cols; j++) out.data[j] = a.data[j] + table.data[indices[j]];
  out.backward = () => {
    const g = out.grad!;
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let j = 0; j < a.cols; j++) ga[j] += g[j];
    }
    if (table.requiresGrad) {
      const gt = table.ensureGrad();
      for (let j = 0; j < a.cols; j++) gt[indices[j]] += g[j];
    }
  };
  return out;
}

/** Softmax over a single [1, n] row. */
export function softmaxRow(tape: Tape, a: Tensor): Tensor {
  if (a.rows !== 1) throw new Error("softmaxRow expects a [1, n] tensor");
  const out = result(tape, 1, a.cols, [a]);
  let max = -Infinity;
  for (let j = 0; j < a.cols; j++) if (a.data[j] > max) max = a.data[j];
  let total = 0;
  for (let j = 0; j < a.cols; j++) {
    out.data[j] = Math.exp(a.data[j] - max);
    total += out.data[j];
  }
  for (let j = 0; j < a.cols; j++) out.data[j] /= total;
  out.backward = () => {
    if (!a.requiresGrad) return;
    const g = out.grad!;
    const ga = a.ensureGrad();
    let dot = 0;
    for (let j = 0; j < a.cols; j++) dot += g[j] * out.data[j];
    for (let j = 0; j < a.cols; j++) ga[j] += out.data[j] * (g[j] - dot);
  };
  return out;
}

/** Row-wise layer normalization with learnable [1, cols] gain and bias. */
export function layerNorm(tape: Tape, a: Tensor, gain: Tensor, bias: Tensor, eps = 1e-5): Tensor {
  if (gain.rows !== 1 || gain.cols !== a.cols || bias.rows !== 1 || bias.cols !== a.cols) {
    throw new Error("layerNorm parameter shape mismatch");
  }
  const out = result(tape, a.rows, a.cols, [a, gain, bias]);
  const n = a.cols;
  const means = new Float64Array(a.rows);
  const invStd = new Float64Array(a.rows);
  const normed = new Float64Array(a.size);
  for (let i = 0; i < a.rows; i++) {
    let mean = 0;
    for (let j = 0; j < n; j++) mean += a.data[i * n + j];
    mean /= n;
    let variance = 0;
    for (let j = 0; j < n; j++) {
      const d = a.data[i * n + j] - mean;
      variance += d * d;
    }
    variance /= n;
    means[i] = mean;
    invStd[i] = 1 / Math.sqrt(variance + eps);
    for (let j = 0; j < n; j++) {
      const z = (a.data[i * n + j] - mean) * invStd[i];
      normed[i * n + j] = z;
      out.data[i * n + j] = z * gain.data[j] + bias.data[j];
    }
  }
  out.backward = () => {
    const g = out.grad!;
    if (gain.requiresGrad) {
      const gg = gain.ensureGrad();
      for (let i = 0; i < a.rows; i++) {
        for (let j = 0; j < n; j++) gg[j] += g[i * n + j] * normed[i * n + j];
      }
    }
    if (bias.requiresGrad) {
      const gb = bias.ensureGrad();
      for (let i = 0; i < a.rows; i++) {
        for (let j = 0; j < n; j++) gb[j] += g[i * n + j];
      }
    }
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < a.rows; i++) {
        // dL/dz_j, then the standard layer-norm jacobian
        let sumDz = 0;
        let sumDzZ = 0;
        for (let j = 0; j < n; j++) {
          const dz = g[i * n + j] * gain.data[j];
          sumDz += dz;
          sumDzZ += dz * normed[i * n + j];
        }
        for (let j = 0; j < n; j++) {
          const dz = g[i * n + j] * gain.data[j];
          ga[i * n + j] += invStd[i] * (dz - sumDz / n - normed[i * n + j] * (sumDzZ / n));
        }
      }
    }
  };
  return out;
}

/** Mean squared error between a [1, d] prediction and a plain target vector. */
export function mse(tape: Tape, pred: Tensor, target: ArrayLike<number>): Tensor {
  if (pred.rows !== 1 || pred.cols !== target.length) throw new Error("mse shape mismatch");
  const out = result(tape, 1, 1, [pred]);
  let acc = 0;
  for (let j = 0; j < pred.cols; j++) {
    const diff = pred.data[j] - target[j];
    acc += diff * diff;
  }
  out.data[0] = acc / pred.cols;
  out.backward = () => {
    if (!pred.requiresGrad) return;
    const g = out.grad![0];
    const gp = pred.ensureGrad();
    for (let j = 0; j < pred.cols; j++) {
      gp[j] += g * (2 * (pred.data[j] - target[j])) / pred.cols;
    }
  };
  return out;
}
