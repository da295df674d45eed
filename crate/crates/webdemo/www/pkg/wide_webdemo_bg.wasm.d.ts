/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demosolution_free: (a: number, b: number) => void;
export const __wbg_demosweep_free: (a: number, b: number) => void;
export const demo_presets: () => [number, number];
export const demosolution_approx_energy: (a: number) => [number, number];
export const demosolution_coords: (a: number) => [number, number];
export const demosolution_cumulative_dissipation: (a: number) => [number, number];
export const demosolution_dt: (a: number) => number;
export const demosolution_energy_kinetic: (a: number) => [number, number];
export const demosolution_energy_total: (a: number) => [number, number];
export const demosolution_eps: (a: number) => number;
export const demosolution_field: (a: number) => [number, number];
export const demosolution_iterations: (a: number) => number;
export const demosolution_layers: (a: number) => number;
export const demosolution_nodes: (a: number) => number;
export const demosolution_oracle: (a: number) => [number, number];
export const demosolution_relative_distance: (a: number) => number;
export const demosolution_rescaled_times: (a: number) => [number, number];
export const demosolution_rescaled_value: (a: number) => number;
export const demosolution_times: (a: number) => [number, number];
export const demosolution_value: (a: number) => number;
export const demosolution_window: (a: number) => number;
export const demosweep_epsilons: (a: number) => [number, number];
export const demosweep_errors: (a: number) => [number, number];
export const residual_demo: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint, h: number) => [number, number, number, number];
export const solve_demo: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint, h: number) => [number, number, number];
export const sweep_demo: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint, i: number) => [number, number, number];
export const demosweep_slope: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
