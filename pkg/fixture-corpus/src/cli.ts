#!/usr/bin/env node
/**
 * Emit the fixture corpus, optionally build its archives, optionally record
 * the archive hashes for the current toolchain.
 *
 *   helix-fixture-corpus --out DIR [--build] [--record FILE]
 */

import { readFileSync, writeFileSync, existsSync } from "node:fs";
import { parseArgs } from "node:util";

import { writeFixtureTree } from "./emit.js";
import {
  buildFixtureCorpus,
  detectToolchain,
  toolchainFingerprint,
} from "./build.js";

function main(): number {
  const { values } = parseArgs({
    options: {
      out: { type: "string" },
      build: { type: "boolean", default: false },
      record: { type: "string" },
    },
  });
  if (!values.out) {
    console.error("usage: helix-fixture-corpus --out DIR [--build] [--record FILE]");
    return 2;
  }

  const emitted = writeFixtureTree(values.out);
  console.log(`emitted ${Object.keys(emitted).length} libraries to ${values.out}`);
  if (!values.build && !values.record) return 0;

  const tc = detectToolchain();
  if (!tc) {
    console.error("no C toolchain found (set HELIX_CC or install cc); not building");
    return 3;
  }
  const built = buildFixtureCorpus(emitted, tc);
  for (const name of Object.keys(built).sort()) {
    console.log(`${built[name].sha256}  lib${name}.a`);
  }

  if (values.record) {
    const fingerprint = toolchainFingerprint(tc);
    const record: Record<string, Record<string, string>> = existsSync(values.record)
      ? JSON.parse(readFileSync(values.record, "utf-8"))
      : {};
    record[fingerprint] = Object.fromEntries(
      Object.entries(built).map(([name, b]) => [name, b.sha256]),
    );
    writeFileSync(values.record, JSON.stringify(record, null, 2) + "\n");
    console.log(`recorded hashes for "${fingerprint}" in ${values.record}`);
  }
  return 0;
}

process.exit(main());
