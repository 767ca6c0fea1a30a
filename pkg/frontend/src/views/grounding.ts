/** Grounded-prediction trace: a faithful rendering of the /predict payload.
 * Every number shown equals a field of the response; nothing is recomputed.
 */

import { PredictResponse } from '../api.js';
import { escapeHtml } from '../html.js';

export function renderGrounding(text: string, payload: PredictResponse): string {
  const chips = payload.fired_rules
    .map((id) => `<span class="rule-chip" data-rule-id="${escapeHtml(id)}">${escapeHtml(id)}</span>`)
    .join('');
  const rows = payload.nearest
    .map(
      (n) => `<tr class="nearest-row">
  <td class="exemplar-id">${escapeHtml(n.exemplar)}</td>
  <td class="rule-id">${escapeHtml(n.rule)}</td>
  <td class="sim" data-sim="${n.sim}">${n.sim.toFixed(4)}</td>
</tr>`,
    )
    .join('\n');
  const verdict = payload.label === 1 ? 'positive' : 'negative';
  return `<section class="grounding" data-revision="${payload.revision}">
<h2>Prediction</h2>
<blockquote class="scratch-text">${escapeHtml(text)}</blockquote>
<p class="verdict" data-label="${payload.label}">
  ${verdict}: score <span class="score" data-score="${payload.score}">${payload.score.toFixed(4)}</span>
  vs threshold <span class="tau" data-tau="${payload.tau}">${payload.tau.toFixed(4)}</span>
</p>
<div class="fired-rules">${chips || '<em>no rule fired</em>'}</div>
<table class="nearest-exemplars">
<thead><tr><th>exemplar</th><th>rule</th><th>similarity</th></tr></thead>
<tbody>
${rows}
</tbody>
</table>
</section>`;
}

/** Whether the predict form may submit; empty scratch text is disabled. */
export function canPredict(text: string): boolean {
  return text.trim().length > 0;
}
