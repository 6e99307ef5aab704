/* tslint:disable */
/* eslint-disable */

/**
 * Exact spectral density of the bare level against its Breit-Wigner
 * approximation, sampled over `span` widths either side of the resonance.
 */
export function lineshape(gamma: number, epsilon: number, e0: number, band_top: number, span: number, n_points: number): string;

/**
 * `rho_pp` of the closed-form model against the combined master equation
 * with matching widths, plus the two-timescale fit residuals.
 */
export function master_vs_model(gamma: number, gamma_prime: number, epsilon: number, t_end: number, n_points: number): string;

/**
 * Trajectory from `|l>` with its dissipative/unitary rate split.
 * `method` is "closed", "quadrature" or "oracle".
 */
export function trajectory(gamma: number, gamma_prime: number, epsilon: number, single_continuum: boolean, t_end: number, n_points: number, method: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly lineshape: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly master_vs_model: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly trajectory: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
