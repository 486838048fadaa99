// Page controller: chat state, pending/error bubbles, dashboard toggling.
// One in-flight request at a time; the composer is disabled while pending.

import { ApiFailure } from './api';
import type { ApiClient } from './api';
import { renderDashboard, renderExplanationsPanel, renderTurn } from './render';
import type { TurnView } from './render';
import type { ChatReply } from './types';

interface ErrorState {
  message: string;
  retry: () => void;
}

export class App {
  private sessionId: string | null = null;
  private turns: TurnView[] = [];
  private pending = false;
  private error: ErrorState | null = null;
  private openDashboardTurn: number | null = null;

  private chatList!: HTMLElement;
  private dashboardHost!: HTMLElement;
  private form!: HTMLFormElement;
  private input!: HTMLInputElement;
  private sendButton!: HTMLButtonElement;
  private regenerateButton!: HTMLButtonElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly storage: Storage = window.localStorage,
  ) {}

  init(): void {
    this.root.textContent = '';
    const layout = document.createElement('div');
    layout.className = 'layout';

    const main = document.createElement('main');
    main.append(renderExplanationsPanel(this.storage));

    const chat = document.createElement('section');
    chat.dataset.area = 'B';
    chat.className = 'chat';
    this.chatList = document.createElement('div');
    this.chatList.className = 'chat-list';
    this.chatList.dataset.testid = 'chat-list';
    chat.append(this.chatList);
    main.append(chat);

    main.append(this.buildComposer());

    this.dashboardHost = document.createElement('aside');
    this.dashboardHost.dataset.area = 'C';
    this.dashboardHost.className = 'dashboard';
    this.dashboardHost.hidden = true;

    layout.append(main, this.dashboardHost);
    this.root.append(layout);
    this.renderTurns();
  }

  private buildComposer(): HTMLElement {
    this.form = document.createElement('form');
    this.form.dataset.area = 'D';
    this.form.className = 'composer';

    this.input = document.createElement('input');
    this.input.type = 'text';
    this.input.placeholder = 'Ask something…';
    this.input.dataset.testid = 'composer-input';

    this.sendButton = document.createElement('button');
    this.sendButton.type = 'submit';
    this.sendButton.dataset.testid = 'send';
    this.sendButton.textContent = 'Send';

    this.regenerateButton = document.createElement('button');
    this.regenerateButton.type = 'button';
    this.regenerateButton.dataset.testid = 'regenerate';
    this.regenerateButton.textContent = 'Regenerate';
    this.regenerateButton.addEventListener('click', () => {
      void this.regenerate();
    });

    this.form.addEventListener('submit', (event) => {
      event.preventDefault();
      const text = this.input.value.trim();
      if (text) void this.send(text);
    });

    this.form.append(this.input, this.sendButton, this.regenerateButton);
    return this.form;
  }

  async send(text: string): Promise<void> {
    if (this.pending) return;
    this.error = null;
    this.setPending(true, text);
    try {
      const reply: ChatReply = await this.api.chat(text, this.sessionId);
      this.sessionId = reply.session_id;
      this.turns.push({ query: text, response: reply.response, archived: [] });
      this.input.value = '';
    } catch (exc) {
      this.error = {
        message: exc instanceof ApiFailure ? `${exc.category}: ${exc.message}` : String(exc),
        retry: () => void this.send(text),
      };
    } finally {
      this.setPending(false);
      this.renderTurns();
    }
  }

  async regenerate(): Promise<void> {
    if (this.pending || !this.sessionId || this.turns.length === 0) return;
    this.error = null;
    this.setPending(true);
    try {
      const reply = await this.api.regenerate(this.sessionId);
      const last = this.turns[this.turns.length - 1];
      last.archived.push(last.response);
      last.response = reply.response;
    } catch (exc) {
      this.error = {
        message: exc instanceof ApiFailure ? `${exc.category}: ${exc.message}` : String(exc),
        retry: () => void this.regenerate(),
      };
    } finally {
      this.setPending(false);
      this.renderTurns();
    }
  }

  private setPending(pending: boolean, pendingQuery?: string): void {
    this.pending = pending;
    this.input.disabled = pending;
    this.sendButton.disabled = pending;
    this.regenerateButton.disabled = pending;
    if (pending) {
      this.renderTurns(pendingQuery);
    }
  }

  private renderTurns(pendingQuery?: string): void {
    this.chatList.textContent = '';
    const handlers = {
      onToggleDetails: (turnIndex: number) => this.toggleDashboard(turnIndex),
      onFlashFinding: (turnIndex: number, findingIndex: number) =>
        this.flashFinding(turnIndex, findingIndex),
    };
    for (const [index, view] of this.turns.entries()) {
      this.chatList.append(renderTurn(index, view, handlers));
    }

    if (this.pending) {
      const bubble = document.createElement('div');
      bubble.className = 'bubble pending';
      bubble.dataset.testid = 'pending';
      bubble.textContent = pendingQuery
        ? `Verifying a response to “${pendingQuery}”…`
        : 'Verifying…';
      this.chatList.append(bubble);
    }

    if (this.error) {
      const bubble = document.createElement('div');
      bubble.className = 'bubble error';
      bubble.dataset.testid = 'error';
      const text = document.createElement('span');
      text.textContent = this.error.message;
      const retry = document.createElement('button');
      retry.type = 'button';
      retry.dataset.testid = 'retry';
      retry.textContent = 'Retry';
      retry.addEventListener('click', () => this.error?.retry());
      bubble.append(text, document.createTextNode(' '), retry);
      this.chatList.append(bubble);
    }

    if (this.openDashboardTurn !== null) {
      if (this.openDashboardTurn < this.turns.length) {
        this.showDashboard(this.openDashboardTurn);
      } else {
        this.closeDashboard();
      }
    }
  }

  private toggleDashboard(turnIndex: number): void {
    if (this.openDashboardTurn === turnIndex && !this.dashboardHost.hidden) {
      this.closeDashboard();
    } else {
      this.showDashboard(turnIndex);
    }
  }

  private showDashboard(turnIndex: number): void {
    this.openDashboardTurn = turnIndex;
    this.dashboardHost.textContent = '';
    this.dashboardHost.append(
      renderDashboard(turnIndex, this.turns[turnIndex], {
        onToggleDetails: () => this.closeDashboard(),
        onFlashFinding: (t, f) => this.flashFinding(t, f),
      }),
    );
    this.dashboardHost.hidden = false;
  }

  private closeDashboard(): void {
    this.openDashboardTurn = null;
    this.dashboardHost.hidden = true;
    this.dashboardHost.textContent = '';
  }

  private flashFinding(turnIndex: number, findingIndex: number): void {
    const marks = this.chatList.querySelectorAll<HTMLElement>(
      `mark[data-turn-index="${turnIndex}"]`,
    );
    for (const mark of marks) {
      const indexes = (mark.dataset.findingIndexes ?? '').split(',').map(Number);
      if (indexes.includes(findingIndex)) {
        mark.classList.add('flash');
        mark.scrollIntoView?.({ block: 'center', behavior: 'smooth' });
        window.setTimeout(() => mark.classList.remove('flash'), 900);
      }
    }
  }
}
