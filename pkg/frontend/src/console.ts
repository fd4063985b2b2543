/**
 * DOM wiring for the reviewer console. All state lives in QueueView; this
 * module only renders and routes events.
 *
 * Configuration comes from the page URL: ?service=<base url>&token=<bearer>
 * (defaults to http://127.0.0.1:8080).
 */

import { ServiceClient } from './api.js';
import { renderDiff } from './diff.js';
import { resolveAction } from './keyboard.js';
import { QueueView } from './queue.js';
import type { EvidenceUtterance, ReviewItem } from './types.js';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function diffFragment(live: string, candidate: string): DocumentFragment {
  const fragment = document.createDocumentFragment();
  for (const span of renderDiff(live, candidate)) {
    const classes = [`diff-${span.op}`];
    if (span.homophone) classes.push('diff-homophone');
    if (span.op === 'equal') {
      fragment.appendChild(el('span', classes.join(' '), span.a));
    } else if (span.op === 'delete') {
      fragment.appendChild(el('del', classes.join(' '), span.a));
    } else if (span.op === 'insert') {
      fragment.appendChild(el('ins', classes.join(' '), span.b));
    } else {
      const node = el('span', classes.join(' '));
      node.appendChild(el('del', '', span.a));
      node.appendChild(el('ins', '', span.b));
      if (span.homophone) node.title = 'known sound-alike confusion';
      fragment.appendChild(node);
    }
  }
  return fragment;
}

class ConsoleApp {
  private readonly queue: QueueView;
  private status: HTMLElement;
  private list: HTMLElement;
  private detail: HTMLElement;
  private input: HTMLInputElement;
  private editing = false;

  constructor(private readonly root: HTMLElement, client: ServiceClient) {
    this.queue = new QueueView(client);
    this.status = el('div', 'status');
    this.list = el('div', 'queue');
    this.detail = el('div', 'detail');
    this.input = el('input', 'correction') as HTMLInputElement;
    this.input.placeholder = 'corrected value (Enter to submit, Esc to cancel)';
    this.input.hidden = true;
    root.append(this.status, this.list, this.detail, this.input);
    document.addEventListener('keydown', (event) => this.onKey(event));
    this.input.addEventListener('keydown', (event) => event.stopPropagation());
    this.input.addEventListener('keydown', (event) => this.onKey(event, true));
  }

  async start(): Promise<void> {
    await this.queue.loadFields();
    await this.queue.load();
    this.render();
  }

  private async onKey(event: KeyboardEvent, editing = false): Promise<void> {
    const action = resolveAction({ key: event.key, editing: editing || this.editing });
    if (!action) return;
    event.preventDefault();
    switch (action) {
      case 'next':
        this.queue.selectNext();
        break;
      case 'previous':
        this.queue.selectPrevious();
        break;
      case 'refresh':
        await this.queue.load();
        break;
      case 'approve':
        await this.finish('approve');
        break;
      case 'begin-correct': {
        const item = this.queue.current();
        if (item) {
          this.editing = true;
          this.input.hidden = false;
          this.input.value = item.live_call_value;
          this.input.focus();
        }
        break;
      }
      case 'submit-correct':
        await this.finish('correct', this.input.value.trim());
        break;
      case 'cancel':
        this.stopEditing();
        break;
    }
    this.render();
  }

  private stopEditing(): void {
    this.editing = false;
    this.input.hidden = true;
    this.input.blur();
  }

  private async finish(action: 'approve' | 'correct', value?: string): Promise<void> {
    const outcome = await this.queue.submit(action, value);
    if (outcome.kind === 'ok') {
      this.note(`${outcome.item.field_id} ${outcome.item.status.toLowerCase()}`);
      this.stopEditing();
    } else if (outcome.kind === 'conflict') {
      this.note(`conflict: ${outcome.message} — review the refreshed item`, true);
      this.stopEditing();
    } else {
      this.note(outcome.message, true);
    }
  }

  private note(message: string, isError = false): void {
    this.status.textContent = message;
    this.status.classList.toggle('error', isError);
  }

  private renderEvidence(item: ReviewItem): HTMLElement {
    const container = el('div', 'evidence');
    for (const utterance of item.evidence) {
      container.appendChild(this.renderUtterance(item, utterance));
    }
    return container;
  }

  private renderUtterance(item: ReviewItem, utterance: EvidenceUtterance): HTMLElement {
    const block = el('div', 'utterance');
    block.appendChild(el('div', 'speaker', `${utterance.speaker} #${utterance.index}`));
    const list = el('ol', 'alternatives');
    for (const alternative of utterance.alternatives) {
      const entry = el('li');
      entry.appendChild(diffFragment(item.live_call_value, alternative));
      list.appendChild(entry);
    }
    block.appendChild(list);
    return block;
  }

  private render(): void {
    this.list.replaceChildren();
    this.queue.items.forEach((item, index) => {
      const row = el(
        'div',
        index === this.queue.selected ? 'item selected' : 'item',
        `${item.field_id} · ${item.call_id} · score ${item.score.toFixed(3)}`,
      );
      row.addEventListener('click', () => {
        this.queue.selected = index;
        this.render();
      });
      this.list.appendChild(row);
    });
    this.detail.replaceChildren();
    const item = this.queue.current();
    if (!item) {
      this.detail.appendChild(el('p', 'empty', 'queue is empty'));
      return;
    }
    this.detail.appendChild(el('h2', '', `${item.field_id} — live value: ${item.live_call_value}`));
    this.detail.appendChild(
      el('p', 'hint', 'j/k move · a approve · c correct · r refresh'),
    );
    this.detail.appendChild(this.renderEvidence(item));
  }
}

export function mountConsole(root: HTMLElement): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const client = new ServiceClient({
    baseUrl: params.get('service') ?? 'http://127.0.0.1:8080',
    token: params.get('token') ?? undefined,
  });
  const app = new ConsoleApp(root, client);
  return app.start();
}
