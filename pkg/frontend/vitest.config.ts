import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    testTimeout: 60000,
    hookTimeout: 150000,
    // the two server-backed suites each spawn their own python fixture
    pool: "forks",
  },
});
