/* tslint:disable */
/* eslint-disable */

/**
 * Result of one interactive solve, consumed by the page scripts through
 * flat typed arrays.
 */
export class DemoSolution {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * The decreasing approximate energy `F(s)`.
     */
    approx_energy(): Float64Array;
    /**
     * Node coordinates, length `nodes`.
     */
    coords(): Float64Array;
    cumulative_dissipation(): Float64Array;
    energy_kinetic(): Float64Array;
    energy_total(): Float64Array;
    /**
     * Minimizer values, layer-major, length `layers * nodes`.
     */
    field(): Float64Array;
    /**
     * Oracle trajectory sampled on the same grid, same layout.
     */
    oracle(): Float64Array;
    /**
     * Rescaled sample times `s = t/eps` of the approximate energy.
     */
    rescaled_times(): Float64Array;
    times(): Float64Array;
    readonly dt: number;
    readonly eps: number;
    readonly iterations: number;
    readonly layers: number;
    readonly nodes: number;
    /**
     * Space-time distance to the oracle relative to the oracle norm.
     */
    readonly relative_distance: number;
    readonly rescaled_value: number;
    readonly value: number;
    /**
     * Right end of the truncation-free reporting window.
     */
    readonly window: number;
}

/**
 * Distance-to-oracle curve of an eps-continuation with its fitted
 * log-log slope.
 */
export class DemoSweep {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    epsilons(): Float64Array;
    errors(): Float64Array;
    readonly slope: number;
}

/**
 * Preset names offered by the page.
 */
export function demo_presets(): any[];

/**
 * Per-layer norms of the fourth-order Euler-Lagrange operator at the
 * minimizer: `[t_0, full_0, wave_0, t_1, full_1, wave_1, ...]`.
 */
export function residual_demo(preset_name: string, eps: number, nodes: number, horizon: number, steps: number, mode: bigint, amplitude: number): Float64Array;

/**
 * Minimize the weighted functional for `preset_name` at `eps` on the
 * `2*pi`-periodic grid with single-mode initial data, and package the
 * pieces the page plots.
 */
export function solve_demo(preset_name: string, eps: number, nodes: number, horizon: number, steps: number, mode: bigint, amplitude: number): DemoSolution;

export function sweep_demo(preset_name: string, eps_coarsest: number, entries: number, nodes: number, horizon: number, steps: number, mode: bigint, amplitude: number): DemoSweep;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demosolution_free: (a: number, b: number) => void;
    readonly __wbg_demosweep_free: (a: number, b: number) => void;
    readonly demo_presets: () => [number, number];
    readonly demosolution_approx_energy: (a: number) => [number, number];
    readonly demosolution_coords: (a: number) => [number, number];
    readonly demosolution_cumulative_dissipation: (a: number) => [number, number];
    readonly demosolution_dt: (a: number) => number;
    readonly demosolution_energy_kinetic: (a: number) => [number, number];
    readonly demosolution_energy_total: (a: number) => [number, number];
    readonly demosolution_eps: (a: number) => number;
    readonly demosolution_field: (a: number) => [number, number];
    readonly demosolution_iterations: (a: number) => number;
    readonly demosolution_layers: (a: number) => number;
    readonly demosolution_nodes: (a: number) => number;
    readonly demosolution_oracle: (a: number) => [number, number];
    readonly demosolution_relative_distance: (a: number) => number;
    readonly demosolution_rescaled_times: (a: number) => [number, number];
    readonly demosolution_rescaled_value: (a: number) => number;
    readonly demosolution_times: (a: number) => [number, number];
    readonly demosolution_value: (a: number) => number;
    readonly demosolution_window: (a: number) => number;
    readonly demosweep_epsilons: (a: number) => [number, number];
    readonly demosweep_errors: (a: number) => [number, number];
    readonly residual_demo: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint, h: number) => [number, number, number, number];
    readonly solve_demo: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint, h: number) => [number, number, number];
    readonly sweep_demo: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint, i: number) => [number, number, number];
    readonly demosweep_slope: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_drop_slice: (a: number, b: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
