/** Client-side input validation (the only decision math done in the browser
 * is checking the discrete sandbox's probability row before posting). */

export const PROB_SUM_TOLERANCE = 1e-9;

export interface ProbCheck {
  ok: boolean;
  sum: number;
  message: string | null;
}

export function checkProbabilities(probs: number[]): ProbCheck {
  if (probs.length === 0) {
    return { ok: false, sum: 0, message: 'at least one state is required' };
  }
  if (probs.some((p) => !Number.isFinite(p) || p < 0)) {
    return { ok: false, sum: NaN, message: 'probabilities must be finite and >= 0' };
  }
  const sum = probs.reduce((a, b) => a + b, 0);
  if (Math.abs(sum - 1) > PROB_SUM_TOLERANCE) {
    return {
      ok: false,
      sum,
      message: `probabilities sum to ${sum.toPrecision(6)}, not 1`,
    };
  }
  return { ok: true, sum, message: null };
}

export interface Bounds {
  min?: number;
  minExclusive?: boolean;
  max?: number;
}

export const PREFERENCE_BOUNDS: Record<string, Bounds> = {
  benefit: {},
  cost: {},
  risk_aversion: { min: 0 },
  n_min: { min: 0, minExclusive: true },
  effort_cost: { min: 0 },
  abundance_penalty: { min: 0 },
  budget: { min: 0, minExclusive: true },
};

export function clampPreference(name: string, value: number): number {
  const bounds = PREFERENCE_BOUNDS[name];
  if (!bounds || !Number.isFinite(value)) {
    return Number.isFinite(value) ? value : 0;
  }
  if (bounds.min !== undefined) {
    if (bounds.minExclusive && value <= bounds.min) {
      return bounds.min + 1e-9;
    }
    if (!bounds.minExclusive && value < bounds.min) {
      return bounds.min;
    }
  }
  if (bounds.max !== undefined && value > bounds.max) {
    return bounds.max;
  }
  return value;
}
