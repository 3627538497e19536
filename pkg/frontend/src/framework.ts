/**
 * Minimal reference framework the adapter bridges: dense layers (mirroring
 * the engine's arithmetic: float64 accumulation, float32 storage) plus a
 * small valid-mode 1-D convolution whose per-filter feature maps exercise
 * the feature-map-mean reduction rule.
 */

import * as fs from "fs";

export type Activation = "relu" | "sigmoid" | "identity";

/** Dense output: one flat vector. Conv output: one array per filter. */
export type LayerOutput = Float32Array | Float32Array[];

export interface FrameworkLayer {
  readonly kind: string;
  readonly activation: Activation;
  /** scalar count of the flattened output for a given flat input length */
  outputLength(inputLength: number): number;
  /** feature-map count, or null when the layer has no map structure */
  mapCount(inputLength: number): number | null;
  forward(input: Float32Array): LayerOutput;
}

function applyActivation(values: Float32Array, activation: Activation): void {
  for (let i = 0; i < values.length; i++) {
    if (activation === "relu") {
      values[i] = values[i] > 0 ? values[i] : 0;
    } else if (activation === "sigmoid") {
      values[i] = 1 / (1 + Math.exp(-values[i]));
    }
  }
}

export class DenseLayer implements FrameworkLayer {
  readonly kind = "dense";

  constructor(
    readonly inputSize: number,
    readonly outputSize: number,
    readonly activation: Activation,
    /** row-major [input][output], float32 */
    readonly weights: Float32Array,
    readonly bias: Float32Array
  ) {
    if (weights.length !== inputSize * outputSize || bias.length !== outputSize) {
      throw new Error(
        `dense layer shape mismatch: ${weights.length} weights, ${bias.length} biases ` +
          `for ${inputSize}x${outputSize}`
      );
    }
  }

  outputLength(): number {
    return this.outputSize;
  }

  mapCount(): null {
    return null;
  }

  forward(input: Float32Array): Float32Array {
    if (input.length !== this.inputSize) {
      throw new Error(`dense layer expects ${this.inputSize} inputs, got ${input.length}`);
    }
    const out = new Float32Array(this.outputSize);
    for (let j = 0; j < this.outputSize; j++) {
      let acc = 0; // float64 accumulation, rounded on store
      for (let i = 0; i < this.inputSize; i++) {
        acc += input[i] * this.weights[i * this.outputSize + j];
      }
      out[j] = acc;
      out[j] = out[j] + this.bias[j];
    }
    applyActivation(out, this.activation);
    return out;
  }
}

export class Conv1dLayer implements FrameworkLayer {
  readonly kind = "conv1d";

  constructor(
    readonly numFilters: number,
    readonly kernelSize: number,
    readonly activation: Activation,
    /** [filter][kernel position], float32 */
    readonly kernels: Float32Array,
    readonly biases: Float32Array
  ) {
    if (kernels.length !== numFilters * kernelSize || biases.length !== numFilters) {
      throw new Error("conv1d kernel/bias sizes disagree with filter count");
    }
  }

  private spatial(inputLength: number): number {
    const out = inputLength - this.kernelSize + 1;
    if (out < 1) {
      throw new Error(`conv1d kernel ${this.kernelSize} too wide for input ${inputLength}`);
    }
    return out;
  }

  outputLength(inputLength: number): number {
    return this.numFilters * this.spatial(inputLength);
  }

  mapCount(): number {
    return this.numFilters;
  }

  forward(input: Float32Array): Float32Array[] {
    const positions = this.spatial(input.length);
    const maps: Float32Array[] = [];
    for (let f = 0; f < this.numFilters; f++) {
      const map = new Float32Array(positions);
      for (let p = 0; p < positions; p++) {
        let acc = 0;
        for (let t = 0; t < this.kernelSize; t++) {
          acc += input[p + t] * this.kernels[f * this.kernelSize + t];
        }
        map[p] = acc;
        map[p] = map[p] + this.biases[f];
      }
      applyActivation(map, this.activation);
      maps.push(map);
    }
    return maps;
  }
}

export function flattenOutput(output: LayerOutput): Float32Array {
  if (output instanceof Float32Array) {
    return output;
  }
  const total = output.reduce((a, m) => a + m.length, 0);
  const flat = new Float32Array(total);
  let off = 0;
  for (const map of output) {
    flat.set(map, off);
    off += map.length;
  }
  return flat;
}

export class SequentialModel {
  constructor(readonly inputSize: number, readonly layers: FrameworkLayer[]) {
    let size = inputSize;
    for (const layer of layers) {
      size = layer.outputLength(size); // throws if the chain cannot connect
    }
  }

  /** The activation hook: every layer's raw output, in order. */
  forwardCollect(input: Float32Array): LayerOutput[] {
    if (input.length !== this.inputSize) {
      throw new Error(`model expects ${this.inputSize} inputs, got ${input.length}`);
    }
    const outputs: LayerOutput[] = [];
    let current = input;
    for (const layer of this.layers) {
      const output = layer.forward(current);
      outputs.push(output);
      current = flattenOutput(output);
    }
    return outputs;
  }
}

export interface LoadedEngineModel {
  model: SequentialModel;
  modelId: string;
  layerSizes: number[];
}

/** Build a weight-identical framework model from an engine ModelFile. */
export function loadEngineModel(path: string): LoadedEngineModel {
  const doc = JSON.parse(fs.readFileSync(path, "utf-8"));
  if (doc.format !== "model" || doc.version !== 1) {
    throw new Error(`${path}: not a version-1 engine model file`);
  }
  const layers: FrameworkLayer[] = [];
  for (const spec of doc.layers) {
    const weights = new Float32Array(spec.input_size * spec.output_size);
    for (let i = 0; i < spec.input_size; i++) {
      for (let j = 0; j < spec.output_size; j++) {
        weights[i * spec.output_size + j] = spec.weights[i][j];
      }
    }
    layers.push(
      new DenseLayer(
        spec.input_size,
        spec.output_size,
        spec.activation,
        weights,
        Float32Array.from(spec.bias)
      )
    );
  }
  const model = new SequentialModel(doc.input_size, layers);
  return {
    model,
    modelId: doc.model_id,
    layerSizes: doc.layers.map((l: { output_size: number }) => l.output_size),
  };
}
