/** Muskrat panel: cost/penalty/budget controls driving a uniform-effort
 * expected-utility curve, a per-province allocation bar chart, and a
 * budget-sweep small-multiples view of shares. */

import type { ApiClient } from './api.js';
import { CurveViewModel, curveViewModel } from './charts.js';
import { PanelState } from './state.js';
import type { AllocationResponse, CurveResponse, MuskratPreferences } from './types.js';

export const MUSKRAT_DEFAULTS: MuskratPreferences = {
  effort_cost: 50,
  abundance_penalty: 1,
};

export interface MuskratCurveView {
  curve: CurveViewModel;
  optimumAction: number;
  optimumIndex: number;
  reducedPrecision: boolean;
}

export interface AllocationView {
  provinces: string[];
  efforts: number[];
  shares: number[];
  shareSum: number;
  budget: number;
  ambiguous: boolean;
  reducedPrecision: boolean;
}

export function toCurveView(response: CurveResponse): MuskratCurveView {
  return {
    curve: curveViewModel(response),
    optimumAction: response.optimum_action,
    optimumIndex: response.optimum_index,
    reducedPrecision: response.reduced_precision,
  };
}

export function toAllocationView(response: AllocationResponse): AllocationView {
  return {
    provinces: response.provinces,
    efforts: response.efforts,
    shares: response.shares,
    shareSum: response.shares.reduce((a, b) => a + b, 0),
    budget: response.budget,
    ambiguous: response.ambiguous,
    reducedPrecision: response.reduced_precision,
  };
}

export interface BudgetSweepView {
  budgets: number[];
  provinces: string[];
  /** shares[i][p]: share of province p at budget i */
  shares: number[][];
}

export class MuskratPanel {
  readonly curveState = new PanelState<MuskratCurveView>();
  readonly allocationState = new PanelState<AllocationView>();
  readonly sweepState = new PanelState<BudgetSweepView>();
  preferences: MuskratPreferences = { ...MUSKRAT_DEFAULTS };
  budget = 400;
  seed = 0;

  constructor(
    private readonly api: ApiClient,
    public posteriorId: string,
  ) {}

  async refreshCurve(): Promise<MuskratCurveView | null> {
    const request = {
      model: 'muskrat' as const,
      posterior_id: this.posteriorId,
      preferences: { ...this.preferences },
      seed: this.seed,
    };
    const applied = await this.curveState.run(async () => {
      const response = await this.api.whatIf(request);
      if (response.kind !== 'eu_curve') {
        throw new Error(`expected an EU curve, got ${response.kind}`);
      }
      return toCurveView(response);
    });
    return applied ? this.curveState.response : null;
  }

  async refreshAllocation(): Promise<AllocationView | null> {
    const request = {
      model: 'muskrat' as const,
      posterior_id: this.posteriorId,
      preferences: { ...this.preferences },
      budget: this.budget,
      seed: this.seed,
    };
    const applied = await this.allocationState.run(async () => {
      const response = await this.api.whatIf(request);
      if (response.kind !== 'allocation') {
        throw new Error(`expected an allocation, got ${response.kind}`);
      }
      return toAllocationView(response);
    });
    return applied ? this.allocationState.response : null;
  }

  /** Shares across a budget ladder; one allocation request per budget. */
  async refreshBudgetSweep(budgets: number[]): Promise<BudgetSweepView | null> {
    const applied = await this.sweepState.run(async () => {
      const shares: number[][] = [];
      let provinces: string[] = [];
      for (const budget of budgets) {
        const response = await this.api.whatIf({
          model: 'muskrat',
          posterior_id: this.posteriorId,
          preferences: { ...this.preferences },
          budget,
          seed: this.seed,
        });
        if (response.kind !== 'allocation') {
          throw new Error(`expected an allocation, got ${response.kind}`);
        }
        provinces = response.provinces;
        shares.push(response.shares);
      }
      return { budgets, provinces, shares };
    });
    return applied ? this.sweepState.response : null;
  }

  setPreference(name: keyof MuskratPreferences, value: number): void {
    this.preferences = { ...this.preferences, [name]: value };
  }
}
