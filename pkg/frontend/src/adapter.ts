/**
 * The bridge itself: run a framework model over a dataset, reduce each
 * mapped layer's output to one scalar per neuron, and emit the engine's
 * trace/profile formats.
 */

import {
  DatasetFile,
  writeProfileJson,
  writeTraceStream,
  TraceRecord,
} from "./binary";
import { FrameworkLayer, LayerOutput, SequentialModel, flattenOutput } from "./framework";

export type ReductionRule = "per-element" | "feature-map-mean";

export interface MappingEntry {
  /** index into the framework model's layer list */
  layer: number;
  reduction: ReductionRule;
}

/** Ordered: entry i becomes engine layer i of the exported stream. */
export type LayerMapping = MappingEntry[];

export function defaultMapping(model: SequentialModel): LayerMapping {
  return model.layers.map((layer, i) => ({
    layer: i,
    reduction: layer.mapCount(0) === null ? "per-element" : "feature-map-mean",
  }));
}

function reducedSize(layer: FrameworkLayer, inputLength: number, rule: ReductionRule): number {
  if (rule === "feature-map-mean") {
    const maps = layer.mapCount(inputLength);
    if (maps === null) {
      throw new Error(`feature-map-mean mapped onto ${layer.kind}, which has no map structure`);
    }
    return maps;
  }
  return layer.outputLength(inputLength);
}

function reduce(output: LayerOutput, rule: ReductionRule): Float32Array {
  if (rule === "per-element") {
    return flattenOutput(output).slice();
  }
  if (output instanceof Float32Array) {
    throw new Error("feature-map-mean mapped onto a flat layer output");
  }
  const reduced = new Float32Array(output.length);
  for (let f = 0; f < output.length; f++) {
    let acc = 0;
    for (let i = 0; i < output[f].length; i++) {
      acc += output[f][i];
    }
    reduced[f] = acc / output[f].length;
  }
  return reduced;
}

/** Engine layer sizes implied by a mapping; must match every record. */
export function mappedLayerSizes(model: SequentialModel, mapping: LayerMapping): number[] {
  const flatSizes: number[] = [];
  let size = model.inputSize;
  for (const layer of model.layers) {
    flatSizes.push(size);
    size = layer.outputLength(size);
  }
  return mapping.map((entry) => {
    const layer = model.layers[entry.layer];
    if (layer === undefined) {
      throw new Error(`mapping names layer ${entry.layer}, model has ${model.layers.length}`);
    }
    return reducedSize(layer, flatSizes[entry.layer], entry.reduction);
  });
}

function reducedLayersFor(
  model: SequentialModel,
  mapping: LayerMapping,
  input: Float32Array
): Float32Array[] {
  const outputs = model.forwardCollect(input);
  return mapping.map((entry) => reduce(outputs[entry.layer], entry.reduction));
}

export function exportTrace(
  model: SequentialModel,
  modelId: string,
  dataset: DatasetFile,
  mapping: LayerMapping,
  outPath: string
): number[] {
  const layerSizes = mappedLayerSizes(model, mapping);
  const records: TraceRecord[] = [];
  for (let i = 0; i < dataset.count; i++) {
    const input = dataset.inputs.subarray(i * dataset.inputSize, (i + 1) * dataset.inputSize);
    records.push({ id: dataset.ids[i], layers: reducedLayersFor(model, mapping, input) });
  }
  writeTraceStream(outPath, modelId, layerSizes, records);
  return layerSizes;
}

export function exportProfile(
  model: SequentialModel,
  modelId: string,
  trainingSet: DatasetFile,
  mapping: LayerMapping,
  outPath: string
): void {
  if (trainingSet.count === 0) {
    throw new Error("cannot profile from an empty training set");
  }
  const layerSizes = mappedLayerSizes(model, mapping);
  const lows = layerSizes.map((w) => new Float32Array(w).fill(Infinity));
  const highs = layerSizes.map((w) => new Float32Array(w).fill(-Infinity));
  for (let i = 0; i < trainingSet.count; i++) {
    const input = trainingSet.inputs.subarray(
      i * trainingSet.inputSize,
      (i + 1) * trainingSet.inputSize
    );
    const layers = reducedLayersFor(model, mapping, input);
    layers.forEach((values, j) => {
      for (let n = 0; n < values.length; n++) {
        if (values[n] < lows[j][n]) lows[j][n] = values[n];
        if (values[n] > highs[j][n]) highs[j][n] = values[n];
      }
    });
  }
  writeProfileJson(outPath, modelId, trainingSet.count, lows, highs);
}
