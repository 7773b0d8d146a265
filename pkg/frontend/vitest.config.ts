import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globals: true,
    environment: "node",
    // The review-flow test boots the real session service.
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
