/* tslint:disable */
/* eslint-disable */

/**
 * Height profile of the exclusion process at `time`, as JSON `{time, x, h, events}`.
 */
export function asep_profile(t: number, time: number, seed: bigint): string;

/**
 * Draws a random bottom bridge of length `len` with slope about `slope`, then
 * resamples the curve above it with endpoints lifted by `gap`. Returns JSON
 * `{bottom, path, trials, acceptance_estimate}`.
 */
export function gibbs_resample_demo(len: number, slope: number, gap: number, t: number, seed: bigint): string;

/**
 * Heights `h(x, rows)` for `x = 1..=width + 1` of one six-vertex sample.
 */
export function s6v_top_row(q: number, zeta: number, width: number, rows: number, seed: bigint): Int32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly asep_profile: (a: number, b: number, c: bigint) => [number, number, number, number];
    readonly gibbs_resample_demo: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly s6v_top_row: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
