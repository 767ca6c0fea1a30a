/** Threshold explorer over the weak-label strategies.  A slider drives k;
 * positive counts and sample flipped documents come live from
 * /weaklabel/preview.  Without a server-side embedding cache the view is
 * disabled with an instruction instead of guessing.
 */

import { WeakLabelPreviewResponse } from '../api.js';
import { escapeHtml } from '../html.js';

export const STRATEGIES = ['mean', 'concat', 'distance'] as const;

export interface TunerState {
  strategy: (typeof STRATEGIES)[number];
  k: number;
  preview: WeakLabelPreviewResponse | null;
  /** Set when the service reports no embedding cache in its state dir. */
  cacheMissing: boolean;
}

function strategySelector(current: string): string {
  const options = STRATEGIES.map(
    (s) => `<option value="${s}"${s === current ? ' selected' : ''}>${s}</option>`,
  ).join('');
  return `<select name="strategy">${options}</select>`;
}

export function renderWeakLabelTuner(state: TunerState): string {
  if (state.cacheMissing) {
    return `<section class="weaklabel-tuner disabled">
<h2>Weak labels</h2>
<p class="instruction">No embedding cache on the server. Run
<code>rbe embed --corpus corpus.jsonl --checkpoint checkpoint.rbe --ruleset ruleset.jsonl -o cache.jsonl</code>
in the state directory, then restart the service.</p>
</section>`;
  }
  const p = state.preview;
  const flips = p
    ? p.sample_flips
        .map(
          (f) =>
            `<li class="flip" data-doc-id="${escapeHtml(f.doc_id)}">${escapeHtml(f.doc_id)}: ${f.from} &rarr; ${f.to}</li>`,
        )
        .join('\n')
    : '';
  const eliminated = p && p.eliminated_rules.length
    ? `<p class="eliminated">eliminated: ${p.eliminated_rules.map(escapeHtml).join(', ')}</p>`
    : '';
  const counts = p
    ? `<p class="positives" data-positives="${p.positives}">${p.positives} / ${p.total} positive</p>`
    : '<p class="positives pending">move the slider to preview</p>';
  return `<section class="weaklabel-tuner" data-revision="${p ? p.revision : ''}">
<h2>Weak labels</h2>
${strategySelector(state.strategy)}
<input type="range" name="k" min="-1" max="1" step="0.01" value="${state.k}" />
${counts}
${eliminated}
<ul class="sample-flips">
${flips}
</ul>
</section>`;
}
