/** Discrete decision sandbox: an editable state/action utility table whose
 * expected utilities come from the service; the browser only validates the
 * probability row before posting. */

import type { ApiClient } from './api.js';
import { PanelState } from './state.js';
import type { DiscreteRequest, DiscreteResponse } from './types.js';
import { checkProbabilities } from './validation.js';

export interface SandboxTable {
  states: string[];
  stateProbs: number[];
  actions: string[];
  utility: number[][];
}

/** The worked example the sandbox opens with. */
export function defaultTable(): SandboxTable {
  return {
    states: ['excellent', 'average', 'poor'],
    stateProbs: [0.3, 0.3, 0.4],
    actions: ['repair', 'do nothing'],
    utility: [
      [0, 20],
      [10, 10],
      [30, 0],
    ],
  };
}

export interface SandboxResult {
  actions: string[];
  expectedUtilities: number[];
  optimalAction: string;
  optimalIndex: number;
  tied: boolean;
  tieTooltip: string | null;
}

export const TIE_TOOLTIP =
  'Several actions share the maximal expected utility; ties are broken by ' +
  'the lowest action index, so the first of them is highlighted.';

export function toResult(response: DiscreteResponse): SandboxResult {
  const max = Math.max(...response.expected_utilities);
  const winners = response.expected_utilities.filter((v) => v === max).length;
  const tied = winners > 1;
  return {
    actions: response.actions,
    expectedUtilities: response.expected_utilities,
    optimalAction: response.optimal_action,
    optimalIndex: response.optimal_index,
    tied,
    tieTooltip: tied ? TIE_TOOLTIP : null,
  };
}

export class DiscreteSandbox {
  readonly state = new PanelState<SandboxResult>();
  validationMessage: string | null = null;

  constructor(private readonly api: ApiClient) {}

  /** Validate locally, then post; returns the applied result or null. */
  async evaluate(table: SandboxTable): Promise<SandboxResult | null> {
    const check = checkProbabilities(table.stateProbs);
    if (!check.ok) {
      this.validationMessage = check.message;
      return null; // invalid input never reaches the service
    }
    this.validationMessage = null;
    const request: DiscreteRequest = {
      states: table.states,
      state_probs: table.stateProbs,
      actions: table.actions,
      utility: table.utility,
    };
    const applied = await this.state.run(async () =>
      toResult(await this.api.whatIfDiscrete(request)),
    );
    return applied ? this.state.response : null;
  }
}
