import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the end-to-end UI test runs a full scripted excavation against a live server
    testTimeout: 120_000,
    hookTimeout: 60_000,
  },
});
