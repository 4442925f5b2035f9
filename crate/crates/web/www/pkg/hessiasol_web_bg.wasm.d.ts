/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_picture_free: (a: number, b: number) => void;
export const cone_map: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const picture_error: (a: number) => number;
export const picture_iterations: (a: number) => number;
export const picture_residual: (a: number) => number;
export const picture_side: (a: number) => number;
export const picture_values: (a: number) => [number, number];
export const sample_profile: (a: number, b: number, c: number) => [number, number, number];
export const solve_disc: (a: number, b: number, c: number, d: number) => [number, number, number];
export const sup_convolve: (a: number, b: number, c: number, d: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
