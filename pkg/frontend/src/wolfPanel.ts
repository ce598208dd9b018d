/** Wolf panel: preference sliders driving an expected-utility curve and a
 * threshold-survival curve, with the optimum marker tied to the service. */

import type { ApiClient } from './api.js';
import {
  CurveViewModel,
  curveViewModel,
  survivalViewModel,
  type CurvePoint,
} from './charts.js';
import { PanelState } from './state.js';
import type { CurveResponse, WolfPreferences } from './types.js';

export const WOLF_DEFAULTS: WolfPreferences = {
  benefit: 0.4,
  cost: 0.15,
  risk_aversion: 100,
  n_min: 900,
};

export interface WolfView {
  curve: CurveViewModel;
  survival: CurvePoint[];
  optimumAction: number;
  optimumIndex: number;
  ambiguous: boolean;
  reducedPrecision: boolean;
  seed: number;
}

export function toWolfView(response: CurveResponse): WolfView {
  const curve = curveViewModel(response);
  return {
    curve,
    survival: survivalViewModel(response),
    optimumAction: response.optimum_action,
    optimumIndex: response.optimum_index,
    ambiguous: response.ambiguous,
    reducedPrecision: response.reduced_precision,
    seed: response.manifest.seed,
  };
}

export class WolfPanel {
  readonly state = new PanelState<WolfView>();
  preferences: WolfPreferences = { ...WOLF_DEFAULTS };
  seed = 0;

  constructor(
    private readonly api: ApiClient,
    public posteriorId: string,
  ) {}

  /** Issue a what-if request for the current slider values (latest wins). */
  async refresh(): Promise<WolfView | null> {
    const request = {
      model: 'wolf' as const,
      posterior_id: this.posteriorId,
      preferences: { ...this.preferences },
      seed: this.seed,
    };
    const applied = await this.state.run(async () => {
      const response = await this.api.whatIf(request);
      if (response.kind !== 'eu_curve') {
        throw new Error(`expected an EU curve, got ${response.kind}`);
      }
      return toWolfView(response);
    });
    return applied ? this.state.response : null;
  }

  setPreference(name: keyof WolfPreferences, value: number): void {
    this.preferences = { ...this.preferences, [name]: value };
  }
}
