/**
 * The micro-library corpus: small freestanding C static libraries engineered
 * so a slicing toolchain exercises every interesting path deterministically.
 *
 * Each library documents its call graph beside the sources: for every export,
 * the set of library functions reachable from it (itself included). Under
 * section-GC slicing at -O0 the surviving function set of a probe build
 * equals exactly that reachable set, so the maps double as a label oracle.
 *
 * Corpus-wide guarantees:
 *  - every library has 2-6 exports and at least one static helper reached by
 *    a strict subset of the exports
 *  - `alpha` and `beta` both export `init` (rename collision pair)
 *  - `mixlib.mx_broken` references an undefined external (discard path)
 *  - `vecmath` spans two translation units (cross-member reachability)
 *  - `hashfn.hf_mix` calls two sibling exports (strict superset slice)
 *
 * Sources stay freestanding (no libc calls) so slices are tiny and label
 * sets stay readable.
 */

export interface FixtureLibrary {
  name: string;
  /** filename -> C source text */
  sources: Record<string, string>;
  /** export -> every library function reachable from it, itself included */
  callGraph: Record<string, string[]>;
  /** non-export functions defined by the sources (static helpers) */
  internals: string[];
  /** exports whose probe build must fail to link */
  broken: string[];
}

export const LIBRARIES: FixtureLibrary[] = [
  {
    name: "tinymath",
    sources: {
      "tinymath.c": `static int helper_internal(int x) { return x * 3 + 1; }

int tm_add(int a, int b) { return helper_internal(a) + b; }

int tm_mul(int a, int b) { return a * b; }
`,
    },
    callGraph: {
      tm_add: ["helper_internal", "tm_add"],
      tm_mul: ["tm_mul"],
    },
    internals: ["helper_internal"],
    broken: [],
  },
  {
    name: "strtool",
    sources: {
      "strtool.c": `static unsigned len_helper(const char *s) {
    unsigned n = 0;
    while (s[n]) n++;
    return n;
}

unsigned st_len(const char *s) { return len_helper(s); }

unsigned st_hash(const char *s) {
    unsigned h = 5381u, i, n = len_helper(s);
    for (i = 0; i < n; i++) h = h * 33u + (unsigned char)s[i];
    return h;
}

int st_cmp(const char *a, const char *b) {
    while (*a && *a == *b) { a++; b++; }
    return (unsigned char)*a - (unsigned char)*b;
}
`,
    },
    callGraph: {
      st_len: ["len_helper", "st_len"],
      st_hash: ["len_helper", "st_hash"],
      st_cmp: ["st_cmp"],
    },
    internals: ["len_helper"],
    broken: [],
  },
  {
    name: "crcbits",
    sources: {
      "crcbits.c": `static unsigned char bit_reflect(unsigned char b) {
    unsigned char r = 0;
    int i;
    for (i = 0; i < 8; i++) if (b & (1u << i)) r |= 1u << (7 - i);
    return r;
}

unsigned char cb_crc8(const unsigned char *data, unsigned n) {
    unsigned char crc = 0xFF;
    unsigned i;
    int bit;
    for (i = 0; i < n; i++) {
        crc ^= bit_reflect(data[i]);
        for (bit = 0; bit < 8; bit++)
            crc = (crc & 0x80) ? (unsigned char)((crc << 1) ^ 0x31) : (unsigned char)(crc << 1);
    }
    return crc;
}

int cb_parity(unsigned v) {
    int bits = 0;
    while (v) { bits ^= (int)(v & 1u); v >>= 1; }
    return bits;
}
`,
    },
    callGraph: {
      cb_crc8: ["bit_reflect", "cb_crc8"],
      cb_parity: ["cb_parity"],
    },
    internals: ["bit_reflect"],
    broken: [],
  },
  // alpha and beta both export `init`: the rename collision pair.
  {
    name: "alpha",
    sources: {
      "alpha.c": `static int a_seed(void) { return 41; }

int init(void) { return a_seed() + 1; }

int alpha_work(int x) { return x ^ 0xA; }
`,
    },
    callGraph: {
      init: ["a_seed", "init"],
      alpha_work: ["alpha_work"],
    },
    internals: ["a_seed"],
    broken: [],
  },
  {
    name: "beta",
    sources: {
      "beta.c": `static int b_scale(int x) { return x << 2; }

int init(void) { return 12; }

int beta_run(int x) { return b_scale(x) - 1; }
`,
    },
    callGraph: {
      init: ["init"],
      beta_run: ["b_scale", "beta_run"],
    },
    internals: ["b_scale"],
    broken: [],
  },
  // mx_broken references an undefined external: its probe must fail to link
  // while the other four exports still slice cleanly out of the same member.
  {
    name: "mixlib",
    sources: {
      "mixlib.c": `int missing_external(int);

static int mx_shared(int x) { return x + 7; }

int mx_a(int x) { return mx_shared(x) * 2; }

int mx_b(int x) { return mx_shared(x) - 5; }

int mx_c(int x) { return x * x; }

int mx_d(int x) { return ~x; }

int mx_broken(int x) { return missing_external(x); }
`,
    },
    callGraph: {
      mx_a: ["mx_a", "mx_shared"],
      mx_b: ["mx_b", "mx_shared"],
      mx_c: ["mx_c"],
      mx_d: ["mx_d"],
    },
    internals: ["mx_shared"],
    broken: ["mx_broken"],
  },
  // Two translation units: vm_norm reaches vm_dot across archive members.
  {
    name: "vecmath",
    sources: {
      "veccore.c": `static int vm_sat(long v) {
    if (v > 2147483647L) return 2147483647;
    if (v < -2147483647L) return -2147483647;
    return (int)v;
}

int vm_dot(const int *a, const int *b, int n) {
    long s = 0;
    int i;
    for (i = 0; i < n; i++) s += (long)a[i] * b[i];
    return vm_sat(s);
}

int vm_scale(int *v, int n, int k) {
    int i;
    for (i = 0; i < n; i++) v[i] *= k;
    return n;
}
`,
      "vecnorm.c": `int vm_dot(const int *a, const int *b, int n);

int vm_norm(const int *v, int n) { return vm_dot(v, v, n); }
`,
    },
    callGraph: {
      vm_dot: ["vm_dot", "vm_sat"],
      vm_scale: ["vm_scale"],
      vm_norm: ["vm_dot", "vm_norm", "vm_sat"],
    },
    internals: ["vm_sat"],
    broken: [],
  },
  {
    name: "bufops",
    sources: {
      "bufops.c": `static int bounds_check(int n) { return n >= 0 && n < (1 << 20); }

int bo_fill(unsigned char *p, int n, unsigned char v) {
    int i;
    if (!bounds_check(n)) return -1;
    for (i = 0; i < n; i++) p[i] = v;
    return n;
}

int bo_copy(unsigned char *dst, const unsigned char *src, int n) {
    int i;
    if (!bounds_check(n)) return -1;
    for (i = 0; i < n; i++) dst[i] = src[i];
    return n;
}

int bo_cmp(const unsigned char *a, const unsigned char *b, int n) {
    int i;
    for (i = 0; i < n; i++) if (a[i] != b[i]) return a[i] - b[i];
    return 0;
}
`,
    },
    callGraph: {
      bo_fill: ["bo_fill", "bounds_check"],
      bo_copy: ["bo_copy", "bounds_check"],
      bo_cmp: ["bo_cmp"],
    },
    internals: ["bounds_check"],
    broken: [],
  },
  // hf_mix reaches both other exports: a strict superset slice.
  {
    name: "hashfn",
    sources: {
      "hashfn.c": `static unsigned hf_rot(unsigned v, int r) {
    return (v << r) | (v >> (32 - r));
}

unsigned hf_djb2(const unsigned char *p, unsigned n) {
    unsigned h = 5381u, i;
    for (i = 0; i < n; i++) h = h * 33u ^ p[i];
    return h;
}

unsigned hf_fnv(const unsigned char *p, unsigned n) {
    unsigned h = 2166136261u, i;
    for (i = 0; i < n; i++) h = (h ^ p[i]) * 16777619u;
    return h;
}

unsigned hf_mix(const unsigned char *p, unsigned n) {
    return hf_rot(hf_djb2(p, n), 5) ^ hf_fnv(p, n);
}
`,
    },
    callGraph: {
      hf_djb2: ["hf_djb2"],
      hf_fnv: ["hf_fnv"],
      hf_mix: ["hf_djb2", "hf_fnv", "hf_mix", "hf_rot"],
    },
    internals: ["hf_rot"],
    broken: [],
  },
  {
    name: "bitpack",
    sources: {
      "bitpack.c": `static unsigned bp_mask(int w) {
    return (w >= 32) ? 0xFFFFFFFFu : (1u << w) - 1u;
}

unsigned bp_get(unsigned word, int off, int w) {
    return (word >> off) & bp_mask(w);
}

unsigned bp_set(unsigned word, int off, int w, unsigned v) {
    unsigned m = bp_mask(w) << off;
    return (word & ~m) | ((v << off) & m);
}

int bp_count(unsigned v) {
    int n = 0;
    while (v) { n += (int)(v & 1u); v >>= 1; }
    return n;
}
`,
    },
    callGraph: {
      bp_get: ["bp_get", "bp_mask"],
      bp_set: ["bp_mask", "bp_set"],
      bp_count: ["bp_count"],
    },
    internals: ["bp_mask"],
    broken: [],
  },
];

/** All function names a library defines, exports and internals alike. */
export function definedFunctions(lib: FixtureLibrary): Set<string> {
  const names = new Set<string>([...lib.internals, ...lib.broken]);
  for (const [exp, reached] of Object.entries(lib.callGraph)) {
    names.add(exp);
    for (const fn of reached) names.add(fn);
  }
  return names;
}

/**
 * Structural self-check of one library's call-graph map. Catches editing
 * mistakes early; the authoritative check is extraction equality against a
 * real slicer.
 */
export function checkLibrary(lib: FixtureLibrary): void {
  const exports = Object.keys(lib.callGraph);
  if (exports.length < 2 || exports.length > 6) {
    throw new Error(`${lib.name}: expected 2-6 exports, got ${exports.length}`);
  }
  if (lib.internals.length < 1) {
    throw new Error(`${lib.name}: needs at least one static helper`);
  }
  const defined = definedFunctions(lib);
  for (const [exp, reached] of Object.entries(lib.callGraph)) {
    if (!reached.includes(exp)) {
      throw new Error(`${lib.name}: ${exp} must reach itself`);
    }
    for (const fn of reached) {
      if (!defined.has(fn)) {
        throw new Error(`${lib.name}: ${exp} reaches unknown function ${fn}`);
      }
    }
    const sorted = [...reached].sort();
    if (reached.join(",") !== sorted.join(",")) {
      throw new Error(`${lib.name}: reach list for ${exp} must be sorted`);
    }
  }
  let strictSubsetHelper = false;
  for (const helper of lib.internals) {
    const reachedBy = exports.filter((e) => lib.callGraph[e].includes(helper));
    if (reachedBy.length === 0) {
      throw new Error(`${lib.name}: helper ${helper} reached by no export`);
    }
    if (reachedBy.length < exports.length) strictSubsetHelper = true;
  }
  if (!strictSubsetHelper) {
    throw new Error(
      `${lib.name}: no helper is reached by a strict subset of exports`,
    );
  }
}
