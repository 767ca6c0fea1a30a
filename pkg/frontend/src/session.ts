/** Single-user workbench session with a revision token guarding edits.
 *
 * Every mutation is confirmed server-side before the session state changes
 * (no optimistic UI); edits made against a stale revision are rejected
 * client-side before they reach the service.
 */

import { ApiClient, PredictResponse, RuleSummary, WeakLabelPreviewResponse } from './api.js';

export class StaleRevisionError extends Error {
  constructor(expected: number, actual: number) {
    super(`ruleset changed (revision ${actual}, edit was against ${expected}); refresh first`);
    this.name = 'StaleRevisionError';
  }
}

export class WorkbenchSession {
  revision = 0;
  rules: RuleSummary[] = [];
  selectedRuleId: string | null = null;
  scratchText = '';

  constructor(readonly api: ApiClient) {}

  /** Pull the current ruleset and revision; call after every mutation. */
  async refresh(): Promise<void> {
    const resp = await this.api.getRules();
    this.revision = resp.revision;
    this.rules = resp.rules;
    if (this.selectedRuleId && !this.rules.some((r) => r.id === this.selectedRuleId)) {
      this.selectedRuleId = null;
    }
  }

  private guard(editRevision: number): void {
    if (editRevision !== this.revision) {
      throw new StaleRevisionError(editRevision, this.revision);
    }
  }

  async addRule(
    editRevision: number,
    body: { id?: string; expr: string; exemplar_ids?: string[] },
  ): Promise<string> {
    this.guard(editRevision);
    const resp = await this.api.addRule(body);
    await this.refresh();
    return resp.id;
  }

  async deleteRule(editRevision: number, ruleId: string): Promise<void> {
    this.guard(editRevision);
    await this.api.deleteRule(ruleId);
    await this.refresh();
  }

  async attachExemplars(
    editRevision: number,
    ruleId: string,
    exemplarIds: string[],
  ): Promise<void> {
    this.guard(editRevision);
    await this.api.attachExemplars(ruleId, exemplarIds);
    await this.refresh();
  }

  /** Scratch predictions are session-local and never persisted. */
  predict(text: string): Promise<PredictResponse> {
    this.scratchText = text;
    return this.api.predict(text);
  }

  previewWeakLabels(strategy: string, k: number): Promise<WeakLabelPreviewResponse> {
    return this.api.weakLabelPreview(strategy, k);
  }
}
