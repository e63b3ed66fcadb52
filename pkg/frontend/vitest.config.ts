import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // The e2e file drives a real server through a few hundred requests.
    testTimeout: 120_000,
    hookTimeout: 60_000,
  },
});
