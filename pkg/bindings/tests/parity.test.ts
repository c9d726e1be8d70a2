/**
 * Cross-boundary parity: the array-based entry points must reproduce the
 * native pipeline exactly (identical float64 values), because both sides run
 * the same code on the same bits. Twenty seeded scenes are checked per mode;
 * a subset goes through the public per-call functions and the full set
 * through the same wire format in batch.
 */
import { describe, expect, it } from "vitest";

import {
  generateScene,
  NativeError,
  rotationErrorDeg,
  runNative,
  solveRegistration,
  solveRotation,
  solveScene,
  translationError,
  type BoundSolveResult,
  type GeneratedScene,
} from "../src/index.js";

const SCENE_COUNT = 20;
const PER_CALL_SCENES = 3;

interface RawSolvedScene {
  scene: {
    source: number[][];
    target: number[][];
    noise_bounds: number[];
    outlier_mask: boolean[];
    ground_truth: { rotation: number[][]; translation: number[] };
  };
  result: BoundSolveResult;
}

function sceneOptions(seed: number, withTranslation: boolean) {
  return {
    nPoints: 40,
    outlierRate: 0.3,
    noiseSigma: 0.01,
    withTranslation,
    seed,
    noiseBound: 0.1,
  };
}

function sceneWireFields(seed: number, withTranslation: boolean) {
  return {
    n_points: 40,
    outlier_rate: 0.3,
    noise_sigma: 0.01,
    with_translation: withTranslation,
    seed,
    noise_bound: 0.1,
  };
}

function maxAbsDiff(a: number[][] | number[], b: number[][] | number[]): number {
  const flatA = (a as number[]).flat ? (a as number[][]).flat() : (a as number[]);
  const flatB = (b as number[]).flat ? (b as number[][]).flat() : (b as number[]);
  let worst = 0;
  for (let i = 0; i < flatA.length; i += 1) {
    worst = Math.max(worst, Math.abs((flatA[i] as number) - (flatB[i] as number)));
  }
  return worst;
}

// Native references for all scenes, fetched in two bridge calls.
const rotationRefs = runNative(
  Array.from({ length: SCENE_COUNT }, (_, seed) => ({
    op: "solve_scene",
    mode: "rotation",
    ...sceneWireFields(seed, false),
  })),
) as RawSolvedScene[];

const registrationRefs = runNative(
  Array.from({ length: SCENE_COUNT }, (_, seed) => ({
    op: "solve_scene",
    mode: "registration",
    ...sceneWireFields(seed, true),
  })),
) as RawSolvedScene[];

describe("solver parity across the boundary", () => {
  it("batched rotation solves equal the native pipeline to 1e-12 per entry", () => {
    const bound = runNative(
      rotationRefs.map((ref) => ({
        op: "solve_rotation",
        source: ref.scene.source,
        target: ref.scene.target,
        noise_bounds: ref.scene.noise_bounds,
        c: 1.0,
        max_iterations: 100,
        tolerance: 1e-7,
      })),
    ) as BoundSolveResult[];
    for (let i = 0; i < SCENE_COUNT; i += 1) {
      const ref = rotationRefs[i]!.result;
      const got = bound[i]!;
      expect(maxAbsDiff(got.rotation, ref.rotation)).toBeLessThanOrEqual(1e-12);
      expect(got.iterations).toBe(ref.iterations);
      expect(got.converged).toBe(ref.converged);
      expect(Math.abs(got.cost - ref.cost)).toBeLessThanOrEqual(1e-12 * (1 + Math.abs(ref.cost)));
    }
  });

  it("batched registration solves equal the native pipeline to 1e-12 per entry", () => {
    const bound = runNative(
      registrationRefs.map((ref) => ({
        op: "solve_registration",
        source: ref.scene.source,
        target: ref.scene.target,
        noise_bounds: ref.scene.noise_bounds,
        c: 1.0,
        max_iterations: 100,
        tolerance: 1e-7,
      })),
    ) as BoundSolveResult[];
    for (let i = 0; i < SCENE_COUNT; i += 1) {
      const ref = registrationRefs[i]!.result;
      const got = bound[i]!;
      expect(maxAbsDiff(got.rotation, ref.rotation)).toBeLessThanOrEqual(1e-12);
      expect(maxAbsDiff(got.translation, ref.translation)).toBeLessThanOrEqual(1e-12);
    }
  });

  it("the public per-call functions match the same references", () => {
    for (let seed = 0; seed < PER_CALL_SCENES; seed += 1) {
      const ref = rotationRefs[seed]!;
      const got = solveRotation(ref.scene.source, ref.scene.target, ref.scene.noise_bounds);
      expect(got.rotation).toEqual(ref.result.rotation);

      const regRef = registrationRefs[seed]!;
      const reg = solveRegistration(
        regRef.scene.source,
        regRef.scene.target,
        regRef.scene.noise_bounds,
      );
      expect(reg.rotation).toEqual(regRef.result.rotation);
      expect(reg.translation).toEqual(regRef.result.translation);
    }
  });

  it("scene generation is elementwise identical to the native generator", () => {
    for (let seed = 0; seed < PER_CALL_SCENES; seed += 1) {
      const scene: GeneratedScene = generateScene(sceneOptions(seed, true));
      const ref = registrationRefs[seed]!.scene;
      expect(scene.source).toEqual(ref.source);
      expect(scene.target).toEqual(ref.target);
      expect(scene.noiseBounds).toEqual(ref.noise_bounds);
      expect(scene.outlierMask).toEqual(ref.outlier_mask);
      expect(scene.groundTruth.rotation).toEqual(ref.ground_truth.rotation);
    }
    const batched = runNative(
      registrationRefs.map((_, seed) => ({
        op: "generate_scene",
        ...sceneWireFields(seed, true),
      })),
    ) as Array<{ source: number[][]; target: number[][] }>;
    for (let seed = 0; seed < SCENE_COUNT; seed += 1) {
      expect(batched[seed]!.source).toEqual(registrationRefs[seed]!.scene.source);
      expect(batched[seed]!.target).toEqual(registrationRefs[seed]!.scene.target);
    }
  });
});

describe("behavioural checks through the boundary", () => {
  it("identity data yields the identity rotation", () => {
    const points = [
      [0.3, 0.1, -0.2],
      [-0.4, 0.25, 0.1],
      [0.05, -0.3, 0.45],
      [0.2, 0.4, 0.3],
    ];
    const result = solveRotation(points, points, 0.1);
    const identity = [
      [1, 0, 0],
      [0, 1, 0],
      [0, 0, 1],
    ];
    expect(rotationErrorDeg(result.rotation, identity)).toBeLessThan(1e-6);
  });

  it("a noise-free scene round trips to its ground truth", () => {
    const scene = generateScene({
      nPoints: 25,
      outlierRate: 0,
      noiseSigma: 0,
      withTranslation: true,
      seed: 7,
    });
    const result = solveRegistration(scene.source, scene.target, scene.noiseBounds);
    expect(rotationErrorDeg(result.rotation, scene.groundTruth.rotation)).toBeLessThan(1e-6);
    expect(translationError(result.translation, scene.groundTruth.translation)).toBeLessThan(
      1e-9,
    );
  });

  it("a solved scene reports consistent metrics", () => {
    const solved = solveScene("registration", sceneOptions(11, true));
    expect(solved.metrics.rotationErrorDeg).toBeLessThan(1.0);
    expect(solved.result.converged).toBe(true);
    expect(solved.scene.outlierMask.filter(Boolean).length).toBe(12);
  });
});

describe("error handling", () => {
  it("rejects mismatched shapes client-side", () => {
    expect(() =>
      solveRotation(
        [
          [0, 0, 0],
          [1, 1, 1],
        ],
        [[0, 0, 0]],
        0.1,
      ),
    ).toThrow(TypeError);
    expect(() => solveRotation([[0, 0]], [[0, 0]], 0.1)).toThrow(TypeError);
  });

  it("surfaces native errors with their code", () => {
    expect(() => generateScene({ nPoints: 10, outlierRate: 1.5 })).toThrow(NativeError);
    try {
      generateScene({ nPoints: 10, outlierRate: 1.5 });
    } catch (error) {
      expect((error as NativeError).code).toBe("invalid-argument");
    }
    try {
      // three identical points are a degenerate geometry for alignment
      const p = [
        [0, 0, 0],
        [0, 0, 0],
        [0, 0, 0],
      ];
      solveRotation(p, p, 0.1);
      expect.unreachable("degenerate geometry should raise");
    } catch (error) {
      expect(error).toBeInstanceOf(NativeError);
      expect((error as NativeError).code).toBe("degenerate-geometry");
    }
  });

  it("does not mutate its inputs", () => {
    const scene = generateScene({ nPoints: 12, outlierRate: 0.25, seed: 3 });
    const sourceCopy = JSON.parse(JSON.stringify(scene.source));
    const targetCopy = JSON.parse(JSON.stringify(scene.target));
    solveRotation(scene.source, scene.target, scene.noiseBounds);
    expect(scene.source).toEqual(sourceCopy);
    expect(scene.target).toEqual(targetCopy);
  });
});
