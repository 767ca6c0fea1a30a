/** Browser entry point: wires the session and the three views into the DOM.
 * All state lives in the WorkbenchSession; every render is a full re-render
 * of the relevant section from the latest service payloads.
 */

import { ApiClient, ApiError } from './api.js';
import { WorkbenchSession } from './session.js';
import { canPredict, renderGrounding } from './views/grounding.js';
import { renderRuleEditor, RuleEditorState } from './views/rule_editor.js';
import { renderWeakLabelTuner, TunerState } from './views/weaklabel_tuner.js';

const BASE_URL = new URLSearchParams(window.location.search).get('service') ?? 'http://127.0.0.1:8321';

const session = new WorkbenchSession(new ApiClient(BASE_URL));

const editorState: RuleEditorState = {
  revision: 0,
  rules: [],
  selectedRuleId: null,
  draftExpr: '',
  error: null,
};

const tunerState: TunerState = {
  strategy: 'mean',
  k: 0.5,
  preview: null,
  cacheMissing: false,
};

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id} container`);
  return node;
}

function renderEditor(): void {
  editorState.revision = session.revision;
  editorState.rules = session.rules;
  editorState.selectedRuleId = session.selectedRuleId;
  el('editor').innerHTML = renderRuleEditor(editorState);
  const form = el('editor').querySelector<HTMLFormElement>('form.rule-draft');
  form?.addEventListener('submit', (ev) => {
    ev.preventDefault();
    const expr = new FormData(form).get('expr') as string;
    editorState.draftExpr = expr;
    void submitRule(expr);
  });
}

async function submitRule(expr: string): Promise<void> {
  try {
    await session.addRule(session.revision, { expr });
    editorState.error = null;
    editorState.draftExpr = '';
  } catch (err) {
    editorState.error = err instanceof ApiError ? err : null;
    if (!(err instanceof ApiError)) throw err;
  }
  renderEditor();
}

async function predictScratch(text: string): Promise<void> {
  if (!canPredict(text)) return;
  const payload = await session.predict(text);
  el('grounding').innerHTML = renderGrounding(text, payload);
}

async function refreshTuner(): Promise<void> {
  try {
    tunerState.preview = await session.previewWeakLabels(tunerState.strategy, tunerState.k);
    tunerState.cacheMissing = false;
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      tunerState.cacheMissing = true;
    } else {
      throw err;
    }
  }
  el('tuner').innerHTML = renderWeakLabelTuner(tunerState);
  const slider = el('tuner').querySelector<HTMLInputElement>('input[name=k]');
  slider?.addEventListener('change', () => {
    tunerState.k = Number(slider.value);
    void refreshTuner();
  });
  const selector = el('tuner').querySelector<HTMLSelectElement>('select[name=strategy]');
  selector?.addEventListener('change', () => {
    tunerState.strategy = selector.value as TunerState['strategy'];
    void refreshTuner();
  });
}

async function boot(): Promise<void> {
  await session.refresh();
  renderEditor();
  await refreshTuner();
  const form = el('scratch').querySelector<HTMLFormElement>('form');
  form?.addEventListener('submit', (ev) => {
    ev.preventDefault();
    const text = new FormData(form).get('text') as string;
    void predictScratch(text);
  });
}

void boot();
