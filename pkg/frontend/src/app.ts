/** DOM bootstrap: wires sliders and tables to the panel controllers. */

import { ApiClient } from './api.js';
import { svgBarChart, svgCurveChart } from './charts.js';
import { defaultTable, DiscreteSandbox, type SandboxTable } from './discrete.js';
import { MuskratPanel } from './muskratPanel.js';
import { debounce } from './state.js';
import type { WolfPreferences } from './types.js';
import { clampPreference } from './validation.js';
import { WolfPanel } from './wolfPanel.js';

const api = new ApiClient('');

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function badge(target: HTMLElement, cls: string, text: string, show: boolean): void {
  let node = target.querySelector<HTMLElement>(`.${cls}`);
  if (!node) {
    node = document.createElement('span');
    node.className = `badge ${cls}`;
    target.appendChild(node);
  }
  node.textContent = text;
  node.style.display = show ? 'inline-block' : 'none';
}

function renderWolf(panel: WolfPanel): void {
  const view = panel.state.response;
  const status = el('wolf-status');
  if (panel.state.error) {
    status.textContent = `service error: ${panel.state.error}`;
    return; // last good charts stay in place
  }
  if (!view) {
    return;
  }
  status.textContent =
    `optimal harvest: ${view.optimumAction} (seed ${view.seed})`;
  badge(status, 'ambiguous', 'statistically ambiguous optimum', view.ambiguous);
  badge(status, 'reduced', 'reduced precision', view.reducedPrecision);
  el('wolf-eu-chart').innerHTML = svgCurveChart(view.curve, {
    title: 'expected utility vs harvest',
  });
  el('wolf-survival-chart').innerHTML = svgCurveChart(
    {
      points: view.survival,
      optimumIndex: view.optimumIndex,
      ambiguous: false,
      hasErrorBand: false,
      reducedPrecision: false,
    },
    { title: 'P(abundance stays above threshold) vs harvest' },
  );
}

function renderMuskrat(panel: MuskratPanel): void {
  const status = el('muskrat-status');
  if (panel.curveState.error || panel.allocationState.error) {
    status.textContent =
      `service error: ${panel.curveState.error ?? panel.allocationState.error}`;
    return;
  }
  const curve = panel.curveState.response;
  if (curve) {
    el('muskrat-eu-chart').innerHTML = svgCurveChart(curve.curve, {
      title: 'expected utility vs uniform effort',
    });
    status.textContent = `optimal uniform effort: ${curve.optimumAction}`;
    badge(status, 'reduced', 'reduced precision', curve.reducedPrecision);
  }
  const allocation = panel.allocationState.response;
  if (allocation) {
    el('muskrat-allocation-chart').innerHTML = svgBarChart(
      allocation.provinces,
      allocation.shares,
      { title: 'allocation shares' },
    );
  }
  const sweep = panel.sweepState.response;
  if (sweep) {
    const panels = sweep.provinces
      .map((province, p) => {
        const series = sweep.shares.map((row) => row[p]);
        return (
          `<figure><figcaption>${province}</figcaption>` +
          svgBarChart(sweep.budgets.map(String), series, { width: 220, height: 120 }) +
          '</figure>'
        );
      })
      .join('');
    el('muskrat-sweep').innerHTML = panels;
  }
}

function renderDiscrete(sandbox: DiscreteSandbox): void {
  const status = el('discrete-status');
  if (sandbox.validationMessage) {
    status.textContent = sandbox.validationMessage;
    return;
  }
  if (sandbox.state.error) {
    status.textContent = `service error: ${sandbox.state.error}`;
    return;
  }
  const result = sandbox.state.response;
  if (!result) {
    return;
  }
  const rows = result.actions
    .map((action, i) => {
      const highlight = i === result.optimalIndex ? ' class="optimal"' : '';
      const tooltip = i === result.optimalIndex && result.tieTooltip
        ? ` title="${result.tieTooltip}"`
        : '';
      return `<tr${highlight}${tooltip}><td>${action}</td><td>${result.expectedUtilities[i]}</td></tr>`;
    })
    .join('');
  el('discrete-result').innerHTML =
    `<table><thead><tr><th>action</th><th>expected utility</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`;
  status.textContent = `optimal action: ${result.optimalAction}`;
}

function readSandboxTable(): SandboxTable {
  const parse = (id: string): number[] =>
    el<HTMLInputElement>(id).value.split(',').map((v) => Number(v.trim()));
  const states = el<HTMLInputElement>('discrete-states').value
    .split(',')
    .map((v) => v.trim());
  const actions = el<HTMLInputElement>('discrete-actions').value
    .split(',')
    .map((v) => v.trim());
  const utility = el<HTMLTextAreaElement>('discrete-utility').value
    .trim()
    .split('\n')
    .map((line) => line.split(',').map((v) => Number(v.trim())));
  return { states, stateProbs: parse('discrete-probs'), actions, utility };
}

export async function bootstrap(): Promise<void> {
  const posteriors = await api.posteriors();
  const wolfId = posteriors.find((p) => p.model === 'wolf')?.id;
  const muskratId = posteriors.find((p) => p.model === 'muskrat')?.id;

  if (wolfId) {
    const panel = new WolfPanel(api, wolfId);
    const refresh = debounce(async () => {
      await panel.refresh();
      renderWolf(panel);
    }, 250);
    for (const name of ['benefit', 'cost', 'risk_aversion', 'n_min'] as const) {
      const slider = el<HTMLInputElement>(`wolf-${name}`);
      slider.addEventListener('input', () => {
        panel.setPreference(
          name as keyof WolfPreferences,
          clampPreference(name, Number(slider.value)),
        );
        refresh();
      });
    }
    await panel.refresh();
    renderWolf(panel);
  }

  if (muskratId) {
    const panel = new MuskratPanel(api, muskratId);
    const refresh = debounce(async () => {
      await Promise.all([panel.refreshCurve(), panel.refreshAllocation()]);
      renderMuskrat(panel);
    }, 250);
    for (const name of ['effort_cost', 'abundance_penalty'] as const) {
      const slider = el<HTMLInputElement>(`muskrat-${name}`);
      slider.addEventListener('input', () => {
        panel.setPreference(name, clampPreference(name, Number(slider.value)));
        refresh();
      });
    }
    const budget = el<HTMLInputElement>('muskrat-budget');
    budget.addEventListener('input', () => {
      panel.budget = clampPreference('budget', Number(budget.value));
      refresh();
    });
    el<HTMLButtonElement>('muskrat-sweep-run').addEventListener('click', async () => {
      const base = panel.budget;
      await panel.refreshBudgetSweep([0.5, 1, 2, 4].map((k) => k * base));
      renderMuskrat(panel);
    });
    await Promise.all([panel.refreshCurve(), panel.refreshAllocation()]);
    renderMuskrat(panel);
  }

  const sandbox = new DiscreteSandbox(api);
  const table = defaultTable();
  el<HTMLInputElement>('discrete-states').value = table.states.join(',');
  el<HTMLInputElement>('discrete-probs').value = table.stateProbs.join(',');
  el<HTMLInputElement>('discrete-actions').value = table.actions.join(',');
  el<HTMLTextAreaElement>('discrete-utility').value = table.utility
    .map((row) => row.join(','))
    .join('\n');
  const evaluate = debounce(async () => {
    await sandbox.evaluate(readSandboxTable());
    renderDiscrete(sandbox);
  }, 250);
  for (const id of ['discrete-states', 'discrete-probs', 'discrete-actions', 'discrete-utility']) {
    el(id).addEventListener('input', evaluate);
  }
  await sandbox.evaluate(table);
  renderDiscrete(sandbox);
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  bootstrap().catch((err) => {
    const status = document.getElementById('app-status');
    if (status) {
      status.textContent = `failed to start: ${err}`;
    }
  });
}
