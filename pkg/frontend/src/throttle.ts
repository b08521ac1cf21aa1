/**
 * Trailing-inclusive rate limiter for slider scrubbing: at most one call
 * per `waitMs`, with the newest pending arguments flushed afterwards so
 * the final slider position always lands.
 */

export interface RateLimited<A extends unknown[]> {
  (...args: A): void;
  cancel(): void;
  flush(): void;
}

export function rateLimit<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): RateLimited<A> {
  let last = -Infinity;
  let timer: ReturnType<typeof setTimeout> | null = null;
  let pending: A | null = null;

  const fire = (args: A) => {
    last = Date.now();
    fn(...args);
  };

  const limited = (...args: A): void => {
    const now = Date.now();
    if (now - last >= waitMs && timer === null) {
      fire(args);
      return;
    }
    pending = args;
    if (timer === null) {
      const delay = Math.max(0, waitMs - (now - last));
      timer = setTimeout(() => {
        timer = null;
        if (pending !== null) {
          const args2 = pending;
          pending = null;
          fire(args2);
        }
      }, delay);
    }
  };

  limited.cancel = () => {
    if (timer !== null) {
      clearTimeout(timer);
      timer = null;
    }
    pending = null;
  };

  limited.flush = () => {
    if (pending !== null) {
      const args = pending;
      limited.cancel();
      fire(args);
    }
  };

  return limited;
}
