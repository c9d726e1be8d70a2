import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // Every bound call spawns a solver process; parity over many scenes is
    // batched but still far slower than a unit test.
    testTimeout: 300_000,
    hookTimeout: 300_000,
  },
});
