export {
  FixtureLibrary,
  LIBRARIES,
  checkLibrary,
  definedFunctions,
} from "./libs.js";
export {
  EmittedLibrary,
  callGraphJson,
  recipeText,
  writeFixtureTree,
} from "./emit.js";
export {
  BuiltArchive,
  Toolchain,
  buildFixtureCorpus,
  detectToolchain,
  toolchainFingerprint,
} from "./build.js";
export {
  BUILD_TEMPLATE,
  ENTRY_TEMPLATE,
  renderBuildScript,
  renderEntry,
} from "./templates.js";
