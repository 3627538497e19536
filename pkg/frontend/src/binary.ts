/**
 * Byte-level readers/writers for the engine's binary formats (layouts in
 * ../FORMATS.md): dataset containers ("DGDS") and trace streams ("DGTR"),
 * plus the machine-readable trace validator.
 */

import * as fs from "fs";

export const DATASET_MAGIC = "DGDS";
export const TRACE_MAGIC = "DGTR";
export const FORMAT_VERSION = 1;

export interface DatasetFile {
  count: number;
  inputSize: number;
  numClasses: number;
  provenance: unknown;
  ids: string[];
  /** row-major count x inputSize */
  inputs: Float32Array;
  labels: Uint32Array;
}

export class FormatViolation extends Error {}

export function readDataset(path: string): DatasetFile {
  const buf = fs.readFileSync(path);
  if (buf.length < 8 || buf.toString("latin1", 0, 4) !== DATASET_MAGIC) {
    throw new FormatViolation(`${path}: bad magic, expected ${DATASET_MAGIC}`);
  }
  const headerLen = buf.readUInt32LE(4);
  if (8 + headerLen > buf.length) {
    throw new FormatViolation(`${path}: file ends inside the header`);
  }
  const header = JSON.parse(buf.toString("utf-8", 8, 8 + headerLen));
  if (header.version !== FORMAT_VERSION) {
    throw new FormatViolation(`${path}: unsupported version ${header.version}`);
  }
  const count: number = header.count;
  const inputSize: number = header.input_size;
  let off = 8 + headerLen;
  const expected = off + count * inputSize * 4 + count * 4;
  if (buf.length < expected) {
    throw new FormatViolation(`${path}: truncated payload (${buf.length} < ${expected} bytes)`);
  }
  if (buf.length > expected) {
    throw new FormatViolation(`${path}: ${buf.length - expected} trailing bytes`);
  }
  const inputs = new Float32Array(count * inputSize);
  for (let i = 0; i < inputs.length; i++, off += 4) {
    inputs[i] = buf.readFloatLE(off);
  }
  const labels = new Uint32Array(count);
  for (let i = 0; i < count; i++, off += 4) {
    labels[i] = buf.readUInt32LE(off);
  }
  const ids: string[] =
    header.input_ids ?? Array.from({ length: count }, (_, i) => String(i));
  return {
    count,
    inputSize,
    numClasses: header.num_classes,
    provenance: header.provenance,
    ids,
    inputs,
    labels,
  };
}

export interface TraceRecord {
  id: string;
  layers: Float32Array[];
}

export function writeTraceStream(
  path: string,
  modelId: string,
  layerSizes: number[],
  records: Iterable<TraceRecord>
): void {
  const all = Array.from(records);
  const header = Buffer.from(
    JSON.stringify({ model_id: modelId, layer_sizes: layerSizes, count: all.length }),
    "utf-8"
  );
  const chunks: Buffer[] = [];
  const prefix = Buffer.alloc(12);
  prefix.write(TRACE_MAGIC, 0, "latin1");
  prefix.writeUInt32LE(FORMAT_VERSION, 4);
  prefix.writeUInt32LE(header.length, 8);
  chunks.push(prefix, header);
  let index = 0;
  for (const record of all) {
    const sizes = record.layers.map((l) => l.length);
    if (sizes.length !== layerSizes.length || sizes.some((s, i) => s !== layerSizes[i])) {
      throw new FormatViolation(
        `record ${index} (${record.id}): layer sizes [${sizes}] drifted from header [${layerSizes}]`
      );
    }
    const idBytes = Buffer.from(record.id, "utf-8");
    const lenBuf = Buffer.alloc(4);
    lenBuf.writeUInt32LE(idBytes.length, 0);
    chunks.push(lenBuf, idBytes);
    const total = layerSizes.reduce((a, b) => a + b, 0);
    const payload = Buffer.alloc(total * 4);
    let off = 0;
    for (const layer of record.layers) {
      for (let i = 0; i < layer.length; i++, off += 4) {
        payload.writeFloatLE(layer[i], off);
      }
    }
    chunks.push(payload);
    index += 1;
  }
  const tmp = `${path}.tmp${process.pid}`;
  fs.writeFileSync(tmp, Buffer.concat(chunks));
  fs.renameSync(tmp, path);
}

export interface TraceStreamFile {
  modelId: string;
  layerSizes: number[];
  records: TraceRecord[];
}

export function readTraceStream(path: string): TraceStreamFile {
  const violations = collectTraceViolations(path, fs.readFileSync(path), true);
  if (violations.parsed === undefined) {
    throw new FormatViolation(violations.violations[0]?.message ?? `${path}: unreadable`);
  }
  if (violations.violations.length > 0) {
    throw new FormatViolation(violations.violations[0].message);
  }
  return violations.parsed;
}

export interface Violation {
  code: string;
  message: string;
  record?: number;
  layer?: number;
}

export interface ValidationResult {
  ok: boolean;
  violations: Violation[];
}

/** Check magic, version, header sanity, record lengths, and finiteness. */
export function validateTrace(path: string): ValidationResult {
  let buf: Buffer;
  try {
    buf = fs.readFileSync(path);
  } catch (e) {
    return {
      ok: false,
      violations: [{ code: "unreadable", message: `${path}: ${(e as Error).message}` }],
    };
  }
  const { violations } = collectTraceViolations(path, buf, false);
  return { ok: violations.length === 0, violations };
}

function collectTraceViolations(
  path: string,
  buf: Buffer,
  stopEarly: boolean
): { violations: Violation[]; parsed?: TraceStreamFile } {
  const violations: Violation[] = [];
  if (buf.length < 4 || buf.toString("latin1", 0, 4) !== TRACE_MAGIC) {
    violations.push({
      code: "bad-magic",
      message: `${path}: bad magic, expected ${TRACE_MAGIC}`,
    });
    return { violations };
  }
  if (buf.length < 12) {
    violations.push({ code: "truncated", message: `${path}: file ends inside the fixed header` });
    return { violations };
  }
  const version = buf.readUInt32LE(4);
  if (version !== FORMAT_VERSION) {
    violations.push({
      code: "bad-version",
      message: `${path}: unsupported version ${version}`,
    });
    return { violations };
  }
  const headerLen = buf.readUInt32LE(8);
  if (12 + headerLen > buf.length) {
    violations.push({ code: "truncated", message: `${path}: file ends inside the header JSON` });
    return { violations };
  }
  let header: { model_id?: unknown; layer_sizes?: unknown; count?: unknown };
  try {
    header = JSON.parse(buf.toString("utf-8", 12, 12 + headerLen));
  } catch (e) {
    violations.push({
      code: "bad-header",
      message: `${path}: header is not valid JSON: ${(e as Error).message}`,
    });
    return { violations };
  }
  const layerSizes = header.layer_sizes;
  if (
    !Array.isArray(layerSizes) ||
    layerSizes.length === 0 ||
    layerSizes.some((s) => !Number.isInteger(s) || s < 1)
  ) {
    violations.push({
      code: "bad-header",
      message: `${path}: layer_sizes must be positive integers`,
    });
    return { violations };
  }
  if (typeof header.count !== "number" || !Number.isInteger(header.count) || header.count < 0) {
    violations.push({ code: "bad-header", message: `${path}: count must be a non-negative integer` });
    return { violations };
  }
  if (typeof header.model_id !== "string" || header.model_id.length === 0) {
    violations.push({ code: "bad-header", message: `${path}: model_id missing` });
    return { violations };
  }

  const sizes = layerSizes as number[];
  const recordFloats = sizes.reduce((a, b) => a + b, 0);
  const records: TraceRecord[] = [];
  let off = 12 + headerLen;
  for (let r = 0; r < (header.count as number); r++) {
    if (off + 4 > buf.length) {
      violations.push({
        code: "truncated",
        message: `${path}: truncated in record ${r} (input_id length)`,
        record: r,
      });
      return { violations };
    }
    const idLen = buf.readUInt32LE(off);
    off += 4;
    if (off + idLen + recordFloats * 4 > buf.length) {
      violations.push({
        code: "truncated",
        message: `${path}: truncated in record ${r}`,
        record: r,
      });
      return { violations };
    }
    const id = buf.toString("utf-8", off, off + idLen);
    off += idLen;
    const layers: Float32Array[] = [];
    for (let j = 0; j < sizes.length; j++) {
      const layer = new Float32Array(sizes[j]);
      for (let i = 0; i < sizes[j]; i++, off += 4) {
        layer[i] = buf.readFloatLE(off);
        if (!Number.isFinite(layer[i])) {
          violations.push({
            code: "non-finite",
            message: `${path}: non-finite value in record ${r}, layer ${j}, neuron ${i}`,
            record: r,
            layer: j,
          });
          if (stopEarly) {
            return { violations };
          }
        }
      }
      layers.push(layer);
    }
    records.push({ id, layers });
  }
  if (off !== buf.length) {
    violations.push({
      code: "trailing-bytes",
      message: `${path}: ${buf.length - off} trailing bytes after ${header.count} records`,
    });
  }
  return {
    violations,
    parsed: { modelId: header.model_id as string, layerSizes: sizes, records },
  };
}

/** Engine-compatible profile JSON ({format: "profile", version: 1, ...}). */
export function writeProfileJson(
  path: string,
  modelId: string,
  count: number,
  lows: Float32Array[],
  highs: Float32Array[]
): void {
  const layers = lows.map((low, j) =>
    Array.from(low, (lo, i) => {
      const hi = highs[j][i];
      if (lo > hi) {
        throw new FormatViolation(`profile layer ${j} neuron ${i}: low ${lo} > high ${hi}`);
      }
      return [lo, hi];
    })
  );
  const doc = {
    format: "profile",
    version: FORMAT_VERSION,
    model_id: modelId,
    count,
    layers,
  };
  const tmp = `${path}.tmp${process.pid}`;
  fs.writeFileSync(tmp, JSON.stringify(doc, Object.keys(doc).sort(), 2) + "\n");
  fs.renameSync(tmp, path);
}
