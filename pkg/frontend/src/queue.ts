/**
 * Queue state for the reviewer console.
 *
 * Submissions are optimistic: the item leaves the pending list
 * immediately and is restored (and refreshed) if the service reports a
 * version conflict, so a racing reviewer's win is never silently
 * overwritten. Client-side format validation runs before any request;
 * the server remains authoritative.
 */

import { ConflictError, ServiceClient, ValidationError } from './api.js';
import type { FieldInfo, QueueFilters, ReviewItem } from './types.js';

export type SubmitOutcome =
  | { kind: 'ok'; item: ReviewItem }
  | { kind: 'conflict'; item: ReviewItem; message: string }
  | { kind: 'invalid'; message: string };

export class QueueView {
  items: ReviewItem[] = [];
  total = 0;
  page = 1;
  pageSize = 20;
  selected = 0;
  filters: QueueFilters = { status: 'Pending' };
  private formats = new Map<string, RegExp>();

  constructor(private readonly client: ServiceClient) {}

  async loadFields(): Promise<FieldInfo[]> {
    const fields = await this.client.fields();
    this.formats = new Map(
      fields.map((f) => [f.field_id, new RegExp(`^(?:${f.format_pattern})$`)]),
    );
    return fields;
  }

  async load(page = this.page): Promise<void> {
    const result = await this.client.items(this.filters, page, this.pageSize);
    this.items = result.items;
    this.total = result.total;
    this.page = result.page;
    if (this.selected >= this.items.length) {
      this.selected = Math.max(0, this.items.length - 1);
    }
  }

  current(): ReviewItem | undefined {
    return this.items[this.selected];
  }

  selectNext(): void {
    if (this.selected < this.items.length - 1) this.selected += 1;
  }

  selectPrevious(): void {
    if (this.selected > 0) this.selected -= 1;
  }

  /** Client-side check against the field's format pattern. */
  validateCorrection(fieldId: string, value: string): boolean {
    const pattern = this.formats.get(fieldId);
    if (!pattern) return value.length > 0;
    return pattern.test(value);
  }

  /**
   * Approve or correct the selected item. The item is removed from the
   * visible queue before the request; a conflict puts the refreshed item
   * back so the reviewer can re-decide against the newer version.
   */
  async submit(action: 'approve' | 'correct', correctedValue?: string): Promise<SubmitOutcome> {
    const item = this.current();
    if (!item) return { kind: 'invalid', message: 'no item selected' };
    if (action === 'correct') {
      if (!correctedValue) return { kind: 'invalid', message: 'correction value required' };
      if (!this.validateCorrection(item.field_id, correctedValue)) {
        return {
          kind: 'invalid',
          message: `value does not match the ${item.field_id} format`,
        };
      }
    }
    const index = this.selected;
    this.items = this.items.filter((_, i) => i !== index);
    this.total = Math.max(0, this.total - 1);
    if (this.selected >= this.items.length) {
      this.selected = Math.max(0, this.items.length - 1);
    }
    try {
      const updated = await this.client.submitReview(
        item.item_id,
        item.version,
        action,
        correctedValue,
      );
      return { kind: 'ok', item: updated };
    } catch (err) {
      if (err instanceof ConflictError) {
        // roll back with the current server state and re-prompt
        const fresh = await this.client.item(item.item_id);
        if (fresh.status === 'Pending') {
          this.items.splice(Math.min(index, this.items.length), 0, fresh);
          this.total += 1;
          this.selected = this.items.indexOf(fresh);
        }
        return { kind: 'conflict', item: fresh, message: err.detail };
      }
      // restore the original item on any other failure
      this.items.splice(Math.min(index, this.items.length), 0, item);
      this.total += 1;
      this.selected = this.items.indexOf(item);
      if (err instanceof ValidationError) {
        return { kind: 'invalid', message: err.detail };
      }
      throw err;
    }
  }
}
