import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 180_000,
    hookTimeout: 60_000,
    // tfjs training is CPU-bound; one worker keeps timings predictable
    pool: "forks",
    poolOptions: { forks: { singleFork: true } },
  },
});
