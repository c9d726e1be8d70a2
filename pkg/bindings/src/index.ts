/**
 * Typed wrappers for the robust rotation/registration solvers and the
 * synthetic scene generator: plain arrays in, plain arrays out. Every call
 * is parity-preserving with the native implementation because the native
 * code does all the math; these functions only validate shapes and translate
 * field names.
 */
import { callNative, NativeError, runNative, setPythonCommand } from "./native.js";

export { NativeError, runNative, setPythonCommand };

export type Vec3 = number[];
export type Mat3 = number[][];
export type Points = number[][];

export interface SolverOptions {
  /** Robust threshold; defaults to 1. */
  c?: number;
  /** Iteration cap; defaults to 100. */
  maxIterations?: number;
  /** Optimality-residual tolerance; defaults to 1e-7. */
  tolerance?: number;
}

export interface BoundSolveResult {
  rotation: Mat3;
  translation: Vec3;
  iterations: number;
  converged: boolean;
  cost: number;
}

export interface SceneOptions {
  nPoints: number;
  outlierRate?: number;
  noiseSigma?: number;
  outlierRadius?: number;
  withTranslation?: boolean;
  maxTranslationNorm?: number;
  seed?: number;
  noiseBound?: number;
  /** Path to an ASCII PLY cloud to downsample instead of the random cube. */
  bunny?: string;
}

export interface GeneratedScene {
  source: Points;
  target: Points;
  noiseBounds: number[];
  outlierMask: boolean[];
  groundTruth: { rotation: Mat3; translation: Vec3 };
  outlierSphereCenter: Vec3;
}

export interface SceneMetrics {
  rotationErrorDeg: number;
  translationErrorM: number;
}

export interface SolvedScene {
  scene: GeneratedScene;
  result: BoundSolveResult;
  metrics: SceneMetrics;
}

function assertPoints(name: string, value: Points): void {
  if (!Array.isArray(value) || value.length === 0) {
    throw new TypeError(`${name} must be a non-empty array of 3-vectors`);
  }
  for (const row of value) {
    if (!Array.isArray(row) || row.length !== 3) {
      throw new TypeError(`${name} rows must have length 3`);
    }
  }
}

function assertSameLength(source: Points, target: Points, bounds: number | number[]): void {
  if (source.length !== target.length) {
    throw new TypeError(
      `source and target must have equal length, got ${source.length} and ${target.length}`,
    );
  }
  if (Array.isArray(bounds) && bounds.length !== source.length) {
    throw new TypeError(
      `noiseBounds must be a scalar or have length ${source.length}, got ${bounds.length}`,
    );
  }
}

function solverFields(options: SolverOptions): object {
  return {
    c: options.c ?? 1.0,
    max_iterations: options.maxIterations ?? 100,
    tolerance: options.tolerance ?? 1e-7,
  };
}

function sceneFields(options: SceneOptions): object {
  return {
    n_points: options.nPoints,
    outlier_rate: options.outlierRate ?? 0.0,
    noise_sigma: options.noiseSigma ?? 0.01,
    outlier_radius: options.outlierRadius ?? 2.0,
    with_translation: options.withTranslation ?? false,
    max_translation_norm: options.maxTranslationNorm ?? 1.0,
    seed: options.seed ?? 0,
    noise_bound: options.noiseBound ?? 0.1,
    bunny: options.bunny ?? null,
  };
}

interface RawSolveResult {
  rotation: Mat3;
  translation: Vec3;
  iterations: number;
  converged: boolean;
  cost: number;
}

interface RawScene {
  source: Points;
  target: Points;
  noise_bounds: number[];
  outlier_mask: boolean[];
  ground_truth: { rotation: Mat3; translation: Vec3 };
  outlier_sphere_center: Vec3;
}

function toScene(raw: RawScene): GeneratedScene {
  return {
    source: raw.source,
    target: raw.target,
    noiseBounds: raw.noise_bounds,
    outlierMask: raw.outlier_mask,
    groundTruth: raw.ground_truth,
    outlierSphereCenter: raw.outlier_sphere_center,
  };
}

function solveRequest(
  op: "solve_rotation" | "solve_registration",
  source: Points,
  target: Points,
  noiseBounds: number | number[],
  options: SolverOptions,
): object {
  assertPoints("source", source);
  assertPoints("target", target);
  assertSameLength(source, target, noiseBounds);
  return { op, source, target, noise_bounds: noiseBounds, ...solverFields(options) };
}

/** Robust rotation estimation between matched point sets. */
export function solveRotation(
  source: Points,
  target: Points,
  noiseBounds: number | number[],
  options: SolverOptions = {},
): BoundSolveResult {
  const request = solveRequest("solve_rotation", source, target, noiseBounds, options);
  return callNative(request) as RawSolveResult;
}

/** Robust rigid registration (rotation plus translation). */
export function solveRegistration(
  source: Points,
  target: Points,
  noiseBounds: number | number[],
  options: SolverOptions = {},
): BoundSolveResult {
  const request = solveRequest("solve_registration", source, target, noiseBounds, options);
  return callNative(request) as RawSolveResult;
}

/** Deterministic synthetic scene; identical to the native generator bit for bit. */
export function generateScene(options: SceneOptions): GeneratedScene {
  return toScene(callNative({ op: "generate_scene", ...sceneFields(options) }) as RawScene);
}

/**
 * Generate and solve one scene natively in a single process; the parity
 * reference for the array-based entry points above.
 */
export function solveScene(
  mode: "rotation" | "registration",
  options: SceneOptions,
  solver: SolverOptions = {},
): SolvedScene {
  const raw = callNative({
    op: "solve_scene",
    mode,
    ...sceneFields(options),
    ...solverFields(solver),
  }) as { scene: RawScene; result: RawSolveResult; metrics: Record<string, number> };
  return {
    scene: toScene(raw.scene),
    result: raw.result,
    metrics: {
      rotationErrorDeg: raw.metrics.rotation_error_deg as number,
      translationErrorM: raw.metrics.translation_error_m as number,
    },
  };
}

/** Geodesic angle between two rotation matrices, in degrees. */
export function rotationErrorDeg(rEst: Mat3, rGt: Mat3): number {
  const result = callNative({ op: "rotation_error_deg", r_est: rEst, r_gt: rGt }) as {
    degrees: number;
  };
  return result.degrees;
}

/** Euclidean distance between two translation vectors. */
export function translationError(tEst: Vec3, tGt: Vec3): number {
  const result = callNative({ op: "translation_error", t_est: tEst, t_gt: tGt }) as {
    meters: number;
  };
  return result.meters;
}
