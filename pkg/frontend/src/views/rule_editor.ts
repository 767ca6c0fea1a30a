/** Rule list + DSL editor.  Server-side validation errors are surfaced
 * inline: a syntax error highlights the reported byte offset in the draft,
 * and a 409 exemplar conflict names the owning rule.
 */

import { ApiError, RuleSummary } from '../api.js';
import { classNames, escapeHtml } from '../html.js';

export interface RuleEditorState {
  revision: number;
  rules: RuleSummary[];
  selectedRuleId: string | null;
  draftExpr: string;
  /** Last server rejection for the draft, if any. */
  error: ApiError | null;
}

function ruleRow(rule: RuleSummary, selected: boolean): string {
  // a rule without exemplars cannot participate in encoding: flag it
  const badge =
    rule.exemplar_ids.length === 0
      ? '<span class="badge badge-warning" title="no exemplars; rule unusable for encoding">no exemplars</span>'
      : '';
  return `<li class="${classNames('rule-row', selected && 'selected')}" data-rule-id="${escapeHtml(rule.id)}">
  <span class="rule-id">${escapeHtml(rule.id)}</span>
  <code class="rule-expr">${escapeHtml(rule.expr)}</code>
  <span class="cover-count">${rule.cover_count} covered</span>
  <span class="exemplar-count">${rule.exemplar_ids.length} exemplar(s)</span>
  ${badge}
</li>`;
}

/** Draft text with the server-reported error offset wrapped in a marker. */
export function highlightOffset(draft: string, offset: number): string {
  const before = escapeHtml(draft.slice(0, offset));
  const at = escapeHtml(draft.slice(offset, offset + 1) || ' ');
  const after = escapeHtml(draft.slice(offset + 1));
  return `${before}<mark class="error-at" data-offset="${offset}">${at}</mark>${after}`;
}

function errorBlock(state: RuleEditorState): string {
  const err = state.error;
  if (!err) return '';
  if (err.offset !== null) {
    return `<div class="editor-error" data-status="${err.status}">
  <p>${escapeHtml(err.message)} (offset ${err.offset})</p>
  <pre class="draft-with-marker">${highlightOffset(state.draftExpr, err.offset)}</pre>
</div>`;
  }
  return `<div class="editor-error" data-status="${err.status}"><p>${escapeHtml(err.message)}</p></div>`;
}

export function renderRuleEditor(state: RuleEditorState): string {
  const rows = state.rules.map((r) => ruleRow(r, r.id === state.selectedRuleId)).join('\n');
  return `<section class="rule-editor" data-revision="${state.revision}">
<h2>Rules</h2>
<ul class="rule-list">
${rows}
</ul>
<form class="rule-draft">
  <textarea name="expr">${escapeHtml(state.draftExpr)}</textarea>
  ${errorBlock(state)}
  <button type="submit">Add rule</button>
</form>
</section>`;
}
