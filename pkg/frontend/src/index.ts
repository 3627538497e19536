export {
  DatasetFile,
  FormatViolation,
  TraceRecord,
  TraceStreamFile,
  ValidationResult,
  Violation,
  readDataset,
  readTraceStream,
  validateTrace,
  writeProfileJson,
  writeTraceStream,
} from "./binary";
export {
  Activation,
  Conv1dLayer,
  DenseLayer,
  FrameworkLayer,
  LayerOutput,
  SequentialModel,
  flattenOutput,
  loadEngineModel,
} from "./framework";
export {
  LayerMapping,
  MappingEntry,
  ReductionRule,
  defaultMapping,
  exportProfile,
  exportTrace,
  mappedLayerSizes,
} from "./adapter";
