/* tslint:disable */
/* eslint-disable */

/**
 * `{tau: [...], h: [...], z: [[z_0..z_K], ...]}` sampled at about `points` grid nodes.
 */
export function ode_trajectory(k: number, b0: number, a: number, beta: number, tau_end: number, points: number): string;

/**
 * Greedy and Balance on one Erdős–Rényi instance, with the exact optimum when the
 * instance is small enough and the fluid-limit prediction `n h(T/n)`.
 */
export function simulate(n: number, horizon: bigint, a: number, beta: number, k: bigint, seed: bigint): string;

/**
 * The stationary point as JSON.
 */
export function stationary_profile(a: number, beta: number, k: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly ode_trajectory: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly simulate: (a: number, b: bigint, c: number, d: number, e: bigint, f: bigint) => [number, number, number, number];
    readonly stationary_profile: (a: number, b: number, c: number) => [number, number, number, number];
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
