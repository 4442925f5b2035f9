/* tslint:disable */
/* eslint-disable */

/**
 * A field on the unit disc in C (one complex variable, two real axes), laid out
 * row-major with NaN outside the closed domain.
 */
export class Picture {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Sup-norm distance to the exact solution, NaN when there is none.
     */
    readonly error: number;
    readonly iterations: number;
    readonly residual: number;
    readonly side: number;
    readonly values: Float64Array;
}

/**
 * Cone membership over the square [−extent, extent]² of eigenvalue pairs (λ₁, λ₂).
 * `kind` is "gamma1", "gamma2" or "phase"; for "phase" the threshold is `sigma`.
 * Each cell holds the distance to the boundary inside the cone and NaN outside.
 */
export function cone_map(kind: string, sigma: number, extent: number, resolution: number): Float64Array;

/**
 * The raw profile, for side-by-side display with its regularization.
 */
export function sample_profile(profile_name: string, h: number): Picture;

/**
 * Solves Δu/4 = ψ on the unit disc, the one-variable Monge–Ampère equation, with boundary
 * data a|z|² + b·x. The exact solution is a|z|² + b·x when ψ = a.
 */
export function solve_disc(h: number, psi: number, a: number, b: number): Picture;

/**
 * Sup-convolution u^ε(x) = sup_y u(y) − (c0/ε)|x − y|² of a named profile with c0 its oscillation.
 */
export function sup_convolve(profile_name: string, h: number, eps: number): Picture;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_picture_free: (a: number, b: number) => void;
    readonly cone_map: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly picture_error: (a: number) => number;
    readonly picture_iterations: (a: number) => number;
    readonly picture_residual: (a: number) => number;
    readonly picture_side: (a: number) => number;
    readonly picture_values: (a: number) => [number, number];
    readonly sample_profile: (a: number, b: number, c: number) => [number, number, number];
    readonly solve_disc: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly sup_convolve: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
