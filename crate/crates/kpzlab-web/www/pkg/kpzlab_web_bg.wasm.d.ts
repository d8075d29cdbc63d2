/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const asep_profile: (a: number, b: number, c: bigint) => [number, number, number, number];
export const gibbs_resample_demo: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
export const s6v_top_row: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
