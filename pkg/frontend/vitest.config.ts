import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // the live-server test boots the python service and a fixture net
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
