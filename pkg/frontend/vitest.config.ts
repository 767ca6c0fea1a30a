import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    // the integration suite trains a small model and spawns the service
    testTimeout: 120_000,
    hookTimeout: 180_000,
  },
});
