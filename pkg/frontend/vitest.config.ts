import { defineConfig } from "vitest/config";

// integration tests shell out to the python tools, which train small
// models; give them room
export default defineConfig({
  test: {
    testTimeout: 180_000,
    hookTimeout: 180_000,
  },
});
