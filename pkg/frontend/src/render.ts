// DOM builders for the four page areas:
//   A explanations panel, B chat turns, C drill-down dashboard, D composer.
// Everything shown is taken verbatim from the backend payload; the only
// client-side arithmetic is percent rounding for display.

import { confidenceBand, confidencePercent, monetaryLabel, politicalLabel } from './format';
import { segmentAnswer } from './highlight';
import type { Finding, VerifiedResponse } from './types';

export interface TurnView {
  query: string;
  response: VerifiedResponse;
  archived: VerifiedResponse[];
}

export interface TurnHandlers {
  onToggleDetails: (turnIndex: number) => void;
  onFlashFinding?: (turnIndex: number, findingIndex: number) => void;
}

const EXPLANATIONS: Array<[string, string]> = [
  [
    'Confidence Score',
    'A weighted 0-100 aggregate of five checks on the answer: validated sources, ' +
      'the model\'s self-assessment, political leaning, monetary interest, and ' +
      'fact-check findings. Higher means fewer warning signs.',
  ],
  [
    'Political Spectrum',
    'The model rates the answer\'s political leaning from -10 (extreme left) ' +
      'through 0 (neutral) to 10 (extreme right). Distance from neutral lowers ' +
      'the confidence score.',
  ],
  [
    'Monetary Interest',
    'The model rates how likely the answer is paid content, from 0 (very ' +
      'unlikely) to 10 (very likely). Paid-content signals lower the confidence score.',
  ],
  [
    'Hallucinations',
    'An independent fact-check pass flags factual errors and subjective ' +
      'statements. Flagged passages are highlighted in the answer; each finding ' +
      'comes with an explanation in the details dashboard.',
  ],
  [
    'Self-Assessment Score',
    'The model rates its own answer from 0 (totally factually wrong) to 100 ' +
      '(totally factually true), with a short justification.',
  ],
];

export const COLLAPSE_KEY = 'chatcheck.explanations.collapsed';

export function renderExplanationsPanel(storage: Storage): HTMLElement {
  const panel = document.createElement('section');
  panel.dataset.area = 'A';
  panel.className = 'explanations';

  const heading = document.createElement('div');
  heading.className = 'explanations-heading';
  const title = document.createElement('h2');
  title.textContent = 'What the verification signals mean';
  const toggle = document.createElement('button');
  toggle.type = 'button';
  toggle.dataset.testid = 'explanations-toggle';
  heading.append(title, toggle);

  const list = document.createElement('dl');
  list.dataset.testid = 'explanations-list';
  for (const [term, text] of EXPLANATIONS) {
    const dt = document.createElement('dt');
    dt.textContent = term;
    const dd = document.createElement('dd');
    dd.textContent = text;
    list.append(dt, dd);
  }

  const apply = (collapsed: boolean) => {
    list.hidden = collapsed;
    toggle.textContent = collapsed ? 'Show' : 'Hide';
    storage.setItem(COLLAPSE_KEY, collapsed ? '1' : '0');
  };
  toggle.addEventListener('click', () => apply(!list.hidden));
  apply(storage.getItem(COLLAPSE_KEY) === '1');

  panel.append(heading, list);
  return panel;
}

function renderAnswer(turnIndex: number, response: VerifiedResponse): HTMLElement {
  const answer = document.createElement('p');
  answer.className = 'answer';
  answer.dataset.testid = 'answer';
  for (const segment of segmentAnswer(response.answer.length, response.findings)) {
    const text = response.answer.slice(segment.start, segment.end);
    if (segment.findingIndexes.length === 0) {
      answer.append(document.createTextNode(text));
      continue;
    }
    const mark = document.createElement('mark');
    mark.textContent = text;
    mark.dataset.turnIndex = String(turnIndex);
    mark.dataset.findingIndexes = segment.findingIndexes.join(',');
    mark.title = segment.findingIndexes
      .map((i) => findingLabel(response.findings[i]))
      .join('\n');
    answer.append(mark);
  }
  return answer;
}

function findingLabel(finding: Finding): string {
  const kind = finding.kind === 'factual_error' ? 'Factual error' : 'Subjective statement';
  return `${kind}: ${finding.explanation || finding.quote}`;
}

function renderSourcesPanel(response: VerifiedResponse): HTMLElement {
  const panel = document.createElement('div');
  panel.className = 'sources-panel';
  panel.dataset.testid = 'sources-panel';
  panel.hidden = true;
  if (response.validated_sources.length === 0) {
    const note = document.createElement('p');
    note.textContent = 'No validated sources for this response.';
    panel.append(note);
    return panel;
  }
  const list = document.createElement('ul');
  for (const url of response.validated_sources) {
    const item = document.createElement('li');
    const link = document.createElement('a');
    link.href = url;
    link.textContent = url;
    link.target = '_blank';
    link.rel = 'noopener noreferrer';
    item.append(link);
    list.append(item);
  }
  panel.append(list);
  return panel;
}

function renderArchivedPanel(archived: VerifiedResponse[]): HTMLElement {
  const panel = document.createElement('div');
  panel.className = 'archived-panel';
  panel.dataset.testid = 'archived-panel';
  panel.hidden = true;
  for (const [index, response] of archived.entries()) {
    const entry = document.createElement('blockquote');
    entry.dataset.testid = 'archived-response';
    const label = document.createElement('strong');
    label.textContent = `Earlier response ${index + 1} (confidence ${confidencePercent(response.breakdown.confidence)}%): `;
    entry.append(label, document.createTextNode(response.answer));
    panel.append(entry);
  }
  return panel;
}

export function renderTurn(turnIndex: number, view: TurnView, handlers: TurnHandlers): HTMLElement {
  const { response } = view;
  const article = document.createElement('article');
  article.className = 'turn';
  article.dataset.testid = 'turn';
  article.dataset.turnIndex = String(turnIndex);

  const question = document.createElement('div');
  question.className = 'bubble user';
  question.textContent = view.query;

  const bubble = document.createElement('div');
  bubble.className = 'bubble assistant';
  bubble.append(renderAnswer(turnIndex, response));

  const extensions = document.createElement('div');
  extensions.className = 'extensions';

  const sourcesPanel = renderSourcesPanel(response);
  const sourcesButton = document.createElement('button');
  sourcesButton.type = 'button';
  sourcesButton.dataset.testid = 'toggle-sources';
  sourcesButton.textContent = `+Sources (${response.validated_sources.length})`;
  sourcesButton.addEventListener('click', () => {
    sourcesPanel.hidden = !sourcesPanel.hidden;
  });

  const percent = confidencePercent(response.breakdown.confidence);
  const chip = document.createElement('span');
  chip.className = `confidence-chip band-${confidenceBand(percent)}`;
  chip.dataset.testid = 'confidence';
  chip.textContent = `${percent}%`;

  extensions.append(sourcesButton, chip);

  if (response.degraded_stages.length > 0) {
    const badge = document.createElement('span');
    badge.className = 'degraded-badge';
    badge.dataset.testid = 'degraded-badge';
    badge.textContent = '⚠ partial check';
    badge.title = `Assessment degraded: ${response.degraded_stages.join(', ')} fell back to neutral defaults.`;
    extensions.append(badge);
  }

  const detailsButton = document.createElement('button');
  detailsButton.type = 'button';
  detailsButton.dataset.testid = 'toggle-details';
  detailsButton.textContent = '+More details';
  detailsButton.addEventListener('click', () => handlers.onToggleDetails(turnIndex));
  extensions.append(detailsButton);

  const archivedPanel = renderArchivedPanel(view.archived);
  if (view.archived.length > 0) {
    const archivedButton = document.createElement('button');
    archivedButton.type = 'button';
    archivedButton.dataset.testid = 'toggle-archived';
    archivedButton.textContent = `Earlier versions (${view.archived.length})`;
    archivedButton.addEventListener('click', () => {
      archivedPanel.hidden = !archivedPanel.hidden;
    });
    extensions.append(archivedButton);
  }

  bubble.append(extensions, sourcesPanel, archivedPanel);
  article.append(question, bubble);
  return article;
}

export function renderDashboard(turnIndex: number, view: TurnView, handlers: TurnHandlers): HTMLElement {
  const { response } = view;
  const container = document.createElement('div');
  container.dataset.testid = 'dashboard';

  const heading = document.createElement('h2');
  heading.textContent = 'Response details';
  container.append(heading);

  const political = section('Political Spectrum', 'dashboard-political');
  political.append(
    line(`Score: ${response.disclosure.political} (${politicalLabel(response.disclosure.political)})`),
    line(response.disclosure.political_explanation),
  );

  const monetary = section('Monetary Interest', 'dashboard-monetary');
  monetary.append(
    line(`Score: ${response.disclosure.monetary} (${monetaryLabel(response.disclosure.monetary)})`),
    line(response.disclosure.monetary_explanation),
  );

  const hallucinations = section('Hallucinations', 'dashboard-hallucinations');
  if (response.findings.length === 0) {
    hallucinations.append(line('No findings.'));
  } else {
    const list = document.createElement('ul');
    for (const [findingIndex, finding] of response.findings.entries()) {
      const item = document.createElement('li');
      item.dataset.testid = 'dashboard-finding';
      const kind = document.createElement('strong');
      kind.textContent = finding.kind === 'factual_error' ? 'Factual error' : 'Subjective statement';
      const quote = document.createElement('q');
      quote.textContent = finding.quote;
      item.append(kind, document.createTextNode(': '), quote);
      if (finding.explanation) {
        item.append(document.createTextNode(` — ${finding.explanation}`));
      }
      if (finding.anchor === null) {
        const note = document.createElement('em');
        note.dataset.testid = 'unanchored-note';
        note.textContent = ' (not locatable in text)';
        item.append(note);
      } else {
        const show = document.createElement('button');
        show.type = 'button';
        show.dataset.testid = 'flash-finding';
        show.textContent = 'show in text';
        show.addEventListener('click', () => handlers.onFlashFinding?.(turnIndex, findingIndex));
        item.append(document.createTextNode(' '), show);
      }
      list.append(item);
    }
    hallucinations.append(list);
  }

  const self = section('Self-Assessment Score', 'dashboard-self');
  self.append(line(`Score: ${response.self_assessment.score}/100`), line(response.self_assessment.explanation));

  container.append(political, monetary, hallucinations, self);

  if (response.degraded_stages.length > 0) {
    const degraded = section('Degraded checks', 'dashboard-degraded');
    degraded.append(
      line(
        `These checks failed and used neutral defaults: ${response.degraded_stages.join(', ')}. ` +
          'Treat the confidence score with extra caution.',
      ),
    );
    container.append(degraded);
  }
  return container;
}

function section(title: string, testid: string): HTMLElement {
  const element = document.createElement('section');
  element.dataset.testid = testid;
  const heading = document.createElement('h3');
  heading.textContent = title;
  element.append(heading);
  return element;
}

function line(text: string): HTMLElement {
  const p = document.createElement('p');
  p.textContent = text;
  return p;
}
