/** Wire types for the decision service (mirrors its pydantic schemas). */

export interface WolfPreferences {
  benefit: number;
  cost: number;
  risk_aversion: number;
  n_min: number;
}

export interface MuskratPreferences {
  effort_cost: number;
  abundance_penalty: number;
}

export type ModelKind = 'wolf' | 'muskrat';

export interface WhatIfRequest {
  model: ModelKind;
  posterior_id: string;
  preferences: WolfPreferences | MuskratPreferences;
  harvest_grid?: number[];
  effort_grid?: number[];
  budget?: number;
  n_reps?: number;
  draws_cap?: number;
  seed?: number;
}

export interface ManifestEcho {
  seed: number;
  artifact_version: string;
  posterior_id: string;
  inputs: Record<string, string>;
  config: Record<string, string>;
}

export interface CurveResponse {
  kind: 'eu_curve';
  model: string;
  actions: number[];
  means: number[];
  std_errors: number[];
  n_samples: number;
  optimum_index: number;
  optimum_action: number;
  ambiguous: boolean;
  risk?: number[] | null;
  mean_abundance?: number[] | null;
  reduced_precision: boolean;
  manifest: ManifestEcho;
}

export interface AllocationResponse {
  kind: 'allocation';
  model: string;
  provinces: string[];
  efforts: number[];
  shares: number[];
  budget: number;
  eu_mean: number;
  eu_std_error: number;
  ambiguous: boolean;
  candidates_evaluated: number;
  reduced_precision: boolean;
  manifest: ManifestEcho;
}

export type WhatIfResponse = CurveResponse | AllocationResponse;

export interface PosteriorSummary {
  id: string;
  model: string;
  n_draws: number;
  n_parameters: number;
  max_rhat: number | null;
  min_ess: number | null;
  warnings: string[];
}

export interface DiscreteRequest {
  states: string[];
  state_probs: number[];
  actions: string[];
  utility: number[][];
  renormalize?: boolean;
}

export interface DiscreteResponse {
  actions: string[];
  expected_utilities: number[];
  optimal_action: string;
  optimal_index: number;
}
