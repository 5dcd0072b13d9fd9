/**
 * Blueprint boilerplate: the two templates a sample assembler needs.
 *
 * Marker contract:
 *  - entry template: `{{stubs}}` expands to one invoke declaration per
 *    component plus a `call_components` definition calling them in order
 *  - build-script template: `{{stubs}}` is the stub source file list and
 *    `{{archives}}` the archive file list, both space-separated and in
 *    component order
 */

export const ENTRY_TEMPLATE = `/* generated entry point: calls one stub per component, in order */
{{stubs}}

int main(void) {
    call_components();
    return 0;
}
`;

export const BUILD_TEMPLATE = `#!/bin/sh
# generated build script; toolchain comes in via CC/CFLAGS/LDFLAGS
# section GC at link time keeps only each component's labeled slice
set -e
exec \${CC:-cc} -ffunction-sections -fdata-sections \${CFLAGS:-} \\
    -Wl,--gc-sections -o sample main.c {{stubs}} {{archives}} \${LDFLAGS:-}
`;

/** Expand the entry template for the given invoke function names. */
export function renderEntry(invokeNames: string[]): string {
  const decls = invokeNames.map((fn) => `void ${fn}(void);`);
  const calls = invokeNames.map((fn) => `    ${fn}();`);
  const block = [
    ...decls,
    "",
    "static void call_components(void) {",
    ...calls,
    "}",
  ].join("\n");
  return ENTRY_TEMPLATE.replace("{{stubs}}", block);
}

/** Expand the build-script template for stub files and archive files. */
export function renderBuildScript(
  stubFiles: string[],
  archiveFiles: string[],
): string {
  return BUILD_TEMPLATE.replace("{{stubs}}", stubFiles.join(" ")).replace(
    "{{archives}}",
    archiveFiles.join(" "),
  );
}
