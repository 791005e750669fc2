#!/usr/bin/env node
/** CLI: export a checkpoint's feature encoder, or generate probe fixtures. */

import { exportEncoder, generateFixtures } from "./export";
import { MODELS } from "./models";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`expected --flag value pairs, got ${argv.slice(i).join(" ")}`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) throw new Error(`missing required flag --${name}`);
  return value;
}

function usage(): void {
  console.error(`usage:
  main.js export --checkpoint model.safetensors --out encoder.fenc [--model NAME]
  main.js fixtures --container encoder.fenc --probes DIR --out DIR

models: ${Object.keys(MODELS).join(", ")}, custom (architecture from checkpoint metadata)`);
}

function main(): number {
  const [command, ...rest] = process.argv.slice(2);
  try {
    if (command === "export") {
      const flags = parseFlags(rest);
      const def = exportEncoder(need(flags, "checkpoint"), need(flags, "out"),
                                flags.get("model"));
      const dims = def.layers.map((l) => l.out_channels);
      console.log(`exported ${def.model ?? "custom"}: ${def.layers.length} layers, ` +
                  `feature dim ${dims[dims.length - 1]}`);
      return 0;
    }
    if (command === "fixtures") {
      const flags = parseFlags(rest);
      const results = generateFixtures(need(flags, "container"), need(flags, "probes"),
                                       need(flags, "out"));
      for (const r of results) {
        console.log(`${r.probe}: ${r.frames} x ${r.dim} -> ${r.outPath}`);
      }
      return 0;
    }
    usage();
    return 2;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

process.exit(main());
