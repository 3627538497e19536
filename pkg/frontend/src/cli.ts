#!/usr/bin/env node
/**
 * Adapter CLI: export-trace, export-profile, validate.
 * Exit codes: 0 success / valid file, 1 usage error, 2 data error / invalid file.
 */

import * as fs from "fs";

import { defaultMapping, exportProfile, exportTrace } from "./adapter";
import { readDataset, validateTrace } from "./binary";
import { loadEngineModel } from "./framework";

function parseFlags(argv: string[], required: string[], optional: string[] = []): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new UsageError(`expected --flag value pairs, got ${argv.slice(i).join(" ")}`);
    }
    flags.set(key.slice(2), value);
  }
  for (const name of required) {
    if (!flags.has(name)) {
      throw new UsageError(`missing required flag --${name}`);
    }
  }
  for (const key of flags.keys()) {
    if (!required.includes(key) && !optional.includes(key)) {
      throw new UsageError(`unknown flag --${key}`);
    }
  }
  return flags;
}

class UsageError extends Error {}

function requireFile(path: string): void {
  if (!fs.existsSync(path)) {
    throw new UsageError(`input file not found: ${path}`);
  }
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "export-trace" || command === "export-profile") {
      const flags = parseFlags(rest, ["model", "data", "out"]);
      requireFile(flags.get("model")!);
      requireFile(flags.get("data")!);
      const { model, modelId } = loadEngineModel(flags.get("model")!);
      const dataset = readDataset(flags.get("data")!);
      const mapping = defaultMapping(model);
      if (command === "export-trace") {
        const sizes = exportTrace(model, modelId, dataset, mapping, flags.get("out")!);
        console.log(`wrote\t${flags.get("out")}\t${dataset.count} records\tlayers=[${sizes}]`);
      } else {
        exportProfile(model, modelId, dataset, mapping, flags.get("out")!);
        console.log(`wrote\t${flags.get("out")}\t${dataset.count} training inputs`);
      }
      return 0;
    }
    if (command === "validate") {
      if (rest.length !== 1 || rest[0].startsWith("--")) {
        throw new UsageError("usage: validate <trace-file>");
      }
      requireFile(rest[0]);
      const result = validateTrace(rest[0]);
      if (result.ok) {
        console.log("ok");
        return 0;
      }
      for (const violation of result.violations) {
        console.log(JSON.stringify(violation));
      }
      return 2;
    }
    throw new UsageError(
      `unknown command ${command ?? "(none)"}; expected export-trace | export-profile | validate`
    );
  } catch (e) {
    if (e instanceof UsageError) {
      console.error(`usage error: ${e.message}`);
      return 1;
    }
    console.error(`error: ${(e as Error).message}`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
