/**
 * Writes the corpus to disk: per library its C sources, a machine-readable
 * call-graph map, and a recipe file a slicing toolchain can consume; plus
 * the blueprint templates once at the tree root.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { FixtureLibrary, LIBRARIES, checkLibrary } from "./libs.js";
import { BUILD_TEMPLATE, ENTRY_TEMPLATE } from "./templates.js";

// -O0 keeps probe survival equal to the call graph; per-function and
// per-data sections are what makes section GC slicing possible at all
const BUILD_FLAGS = "-O0 -ffunction-sections -fdata-sections";

export function recipeText(lib: FixtureLibrary): string {
  const files = Object.keys(lib.sources).sort();
  const objs = files.map((f) => f.replace(/\.c$/, ".o")).join(" ");
  const compile = `$CC ${BUILD_FLAGS} -c ${files.join(" ")}`;
  // ar D flag: deterministic archives regardless of binutils defaults
  return (
    `name = "${lib.name}"\n` +
    `build_cmd = "${compile} && ar rcsD lib${lib.name}.a ${objs}"\n` +
    `artifact = "lib${lib.name}.a"\n`
  );
}

export function callGraphJson(lib: FixtureLibrary): string {
  return (
    JSON.stringify(
      {
        library: lib.name,
        exports: lib.callGraph,
        internals: [...lib.internals].sort(),
        broken: [...lib.broken].sort(),
      },
      null,
      2,
    ) + "\n"
  );
}

export interface EmittedLibrary {
  dir: string;
  recipe: string;
}

/**
 * Write every library under `root/<name>/` and the blueprint templates
 * under `root/templates/`. Returns the per-library locations.
 */
export function writeFixtureTree(root: string): Record<string, EmittedLibrary> {
  const emitted: Record<string, EmittedLibrary> = {};
  for (const lib of LIBRARIES) {
    checkLibrary(lib);
    const dir = join(root, lib.name);
    mkdirSync(dir, { recursive: true });
    for (const [filename, text] of Object.entries(lib.sources)) {
      writeFileSync(join(dir, filename), text);
    }
    writeFileSync(join(dir, "callgraph.json"), callGraphJson(lib));
    const recipe = join(dir, `${lib.name}.toml`);
    writeFileSync(recipe, recipeText(lib));
    emitted[lib.name] = { dir, recipe };
  }
  const tplDir = join(root, "templates");
  mkdirSync(tplDir, { recursive: true });
  writeFileSync(join(tplDir, "main.c.tpl"), ENTRY_TEMPLATE);
  writeFileSync(join(tplDir, "build.sh.tpl"), BUILD_TEMPLATE);
  return emitted;
}
