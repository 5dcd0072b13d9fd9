/**
 * Builds the emitted corpus into static archives by executing each recipe's
 * build command, and fingerprints the result so byte-stability under a
 * pinned toolchain can be recorded and compared.
 */

import { execFileSync } from "node:child_process";
import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import { join } from "node:path";

import { EmittedLibrary } from "./emit.js";

export interface Toolchain {
  cc: string;
}

/**
 * Locate a C compiler: HELIX_CC if set, plain `cc` otherwise. Returns null
 * when none answers, so callers can skip build-dependent work with a clear
 * diagnostic instead of failing mid-way.
 */
export function detectToolchain(): Toolchain | null {
  const cc = process.env.HELIX_CC ?? "cc";
  try {
    execFileSync(cc, ["-dumpversion"], { stdio: "pipe" });
    return { cc };
  } catch {
    return null;
  }
}

/** Compiler identity string the archive-hash record is keyed by. */
export function toolchainFingerprint(tc: Toolchain): string {
  const version = execFileSync(tc.cc, ["-dumpversion"], { stdio: "pipe" })
    .toString()
    .trim();
  const machine = execFileSync(tc.cc, ["-dumpmachine"], { stdio: "pipe" })
    .toString()
    .trim();
  return `${machine} cc-${version}`;
}

function parseRecipe(path: string): Record<string, string> {
  const entries: Record<string, string> = {};
  for (const line of readFileSync(path, "utf-8").split("\n")) {
    const m = line.match(/^(\w+)\s*=\s*"(.*)"$/);
    if (m) entries[m[1]] = m[2];
  }
  return entries;
}

export interface BuiltArchive {
  archive: string;
  sha256: string;
}

/**
 * Run every recipe's build command and hash the resulting archive.
 * Throws with the library name and captured output on the first failure:
 * a corpus that only half-builds is useless as a fixture.
 */
export function buildFixtureCorpus(
  emitted: Record<string, EmittedLibrary>,
  tc: Toolchain,
): Record<string, BuiltArchive> {
  const built: Record<string, BuiltArchive> = {};
  for (const name of Object.keys(emitted).sort()) {
    const { dir, recipe } = emitted[name];
    const spec = parseRecipe(recipe);
    if (!spec.build_cmd || !spec.artifact) {
      throw new Error(`${name}: recipe lacks build_cmd/artifact`);
    }
    try {
      execFileSync("sh", ["-c", spec.build_cmd], {
        cwd: dir,
        env: { ...process.env, CC: tc.cc },
        stdio: "pipe",
      });
    } catch (err: any) {
      const detail = err.stderr?.toString() ?? err.message;
      throw new Error(`${name}: build failed: ${detail}`);
    }
    const archive = join(dir, spec.artifact);
    const sha256 = createHash("sha256")
      .update(readFileSync(archive))
      .digest("hex");
    built[name] = { archive, sha256 };
  }
  return built;
}
