import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    globalSetup: ["tests/globalSetup.ts"],
    testTimeout: 30000,
    hookTimeout: 60000,
    // the integration file drives one shared engine; keep files sequential
    fileParallelism: false,
  },
});
