import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    testTimeout: 30_000,
    hookTimeout: 60_000,
    // The live-rate assertions share one CPU core with the gateway process;
    // running test files one at a time keeps their timing honest.
    fileParallelism: false,
  },
});
