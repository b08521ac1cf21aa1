import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { rateLimit } from "../src/throttle.js";

describe("rateLimit", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("fires immediately when idle", () => {
    const calls: number[] = [];
    const limited = rateLimit((x: number) => calls.push(x), 100);
    limited(1);
    expect(calls).toEqual([1]);
  });

  it("coalesces a burst into leading + trailing", () => {
    const calls: number[] = [];
    const limited = rateLimit((x: number) => calls.push(x), 100);
    limited(1);
    limited(2);
    limited(3);
    expect(calls).toEqual([1]);
    vi.advanceTimersByTime(100);
    expect(calls).toEqual([1, 3]);
  });

  it("a full slider sweep issues at most 25 calls", () => {
    // 201 positions from -1 to +1, one event every 10 ms (2 s scrub).
    const calls: number[] = [];
    const limited = rateLimit((g: number) => calls.push(g), 100);
    for (let i = 0; i <= 200; i++) {
      limited(-1 + i * 0.01);
      vi.advanceTimersByTime(10);
    }
    vi.advanceTimersByTime(200);
    expect(calls.length).toBeGreaterThanOrEqual(2);
    expect(calls.length).toBeLessThanOrEqual(25);
    expect(calls[0]).toBe(-1);
    expect(calls[calls.length - 1]).toBeCloseTo(1.0, 10);
    // arguments arrive in slider order
    for (let i = 1; i < calls.length; i++) {
      expect(calls[i]).toBeGreaterThan(calls[i - 1]);
    }
  });

  it("cancel drops the pending trailing call", () => {
    const calls: number[] = [];
    const limited = rateLimit((x: number) => calls.push(x), 100);
    limited(1);
    limited(2);
    limited.cancel();
    vi.advanceTimersByTime(500);
    expect(calls).toEqual([1]);
  });

  it("flush delivers the pending call right away", () => {
    const calls: number[] = [];
    const limited = rateLimit((x: number) => calls.push(x), 100);
    limited(1);
    limited(2);
    limited.flush();
    expect(calls).toEqual([1, 2]);
  });
});
