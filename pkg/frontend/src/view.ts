/** DOM rendering for session results and the capture history.
 *
 * Every ApiResponse field is rendered with a `data-field` attribute (or
 * listed in OMITTED_FIELDS); the schema test walks the response shape and
 * fails if a field silently gains no home in the UI.
 */

import type { ApiStatus } from './api.js';
import type { HistoryEntry } from './history.js';

export const OMITTED_FIELDS: string[] = []; // everything is shown

const STATUS_LABEL: Record<ApiStatus, string> = {
  ok: 'Plate recognized',
  no_plate: 'No plate found in the image',
  no_characters: 'Plate region found, but no readable characters',
  low_confidence: 'Reading too uncertain to trust',
};

const VEHICLE_LABELS: Record<string, string> = {
  plate: 'Registered plate',
  owner_name: 'Owner',
  contact_address: 'Address',
  contact_number: 'Contact',
  make: 'Make',
  model: 'Model',
  engine_number: 'Engine no.',
  tax_status: 'Tax status',
};

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function field(name: string, value: string): HTMLElement {
  const row = el('div', 'field');
  row.appendChild(el('span', 'field-label', VEHICLE_LABELS[name] ?? name));
  const v = el('span', 'field-value', value);
  v.dataset.field = name;
  row.appendChild(v);
  return row;
}

export function renderResult(entry: HistoryEntry): HTMLElement {
  const { response } = entry;
  const card = el('article', `result status-${response.status}`);
  card.dataset.status = response.status;

  if (entry.thumbnail) {
    const img = document.createElement('img');
    img.className = 'thumbnail';
    img.src = entry.thumbnail;
    img.alt = 'submitted image';
    card.appendChild(img);
  }

  const headline = el('h2', 'headline', STATUS_LABEL[response.status]);
  card.appendChild(headline);

  if (response.status === 'ok' && response.plate_text) {
    const plate = el('div', 'plate-text', response.plate_text);
    plate.dataset.field = 'plate_text';
    card.appendChild(plate);
    if (response.confidence !== null) {
      card.appendChild(field('confidence', response.confidence.toFixed(3)));
    }
  } else {
    // keep the fields addressable even when empty
    card.appendChild(field('plate_text', response.plate_text ?? '—'));
    card.appendChild(field('confidence', response.confidence?.toFixed(3) ?? '—'));
  }

  const vehicle = response.vehicle;
  const vehicleBox = el('div', 'vehicle');
  vehicleBox.dataset.field = 'vehicle';
  if (vehicle) {
    if (vehicle.stolen) {
      const alert = el('div', 'alert-stolen', '⚠ REPORTED STOLEN — verify and escalate');
      alert.setAttribute('role', 'alert');
      alert.dataset.field = 'stolen';
      card.appendChild(alert);
    } else {
      const clear = el('div', 'not-stolen', 'No stolen-vehicle report');
      clear.dataset.field = 'stolen';
      vehicleBox.appendChild(clear);
    }
    for (const key of Object.keys(VEHICLE_LABELS)) {
      vehicleBox.appendChild(field(key, String(vehicle[key as keyof typeof vehicle] ?? '')));
    }
    const complaints = el('div', 'complaints');
    complaints.dataset.field = 'complaints';
    complaints.appendChild(el('span', 'field-label', 'Complaints'));
    if (vehicle.complaints.length === 0) {
      complaints.appendChild(el('span', 'field-value', 'none on record'));
    } else {
      const list = document.createElement('ul');
      for (const item of vehicle.complaints) {
        const li = document.createElement('li');
        li.textContent = item;
        list.appendChild(li);
      }
      complaints.appendChild(list);
    }
    vehicleBox.appendChild(complaints);
  } else if (response.status === 'ok') {
    vehicleBox.appendChild(el('p', 'no-record', 'No vehicle record on file for this plate'));
  }
  card.appendChild(vehicleBox);

  card.appendChild(field('match_kind', response.match_kind));
  const meta = el('div', 'meta',
    `session ${response.session_id} · ${new Date(entry.submittedAt).toLocaleString()}`);
  meta.dataset.field = 'session_id';
  card.appendChild(meta);
  if (entry.expired) {
    card.appendChild(el('div', 'expired', 'Session no longer available on the server'));
  }
  return card;
}

export function renderHistoryList(
  entries: HistoryEntry[],
  onSelect: (entry: HistoryEntry) => void,
): HTMLElement {
  const box = el('section', 'history');
  box.appendChild(el('h2', 'history-title', 'Capture history'));
  if (entries.length === 0) {
    box.appendChild(el('p', 'history-empty', 'No captures yet'));
    return box;
  }
  const list = document.createElement('ul');
  list.className = 'history-list';
  for (const entry of entries) {
    const item = document.createElement('li');
    item.className = `history-item status-${entry.response.status}`
      + (entry.expired ? ' expired' : '');
    const summary = entry.response.plate_text ?? entry.response.status;
    const when = new Date(entry.submittedAt).toLocaleTimeString();
    const button = document.createElement('button');
    button.type = 'button';
    button.textContent = `${summary} · ${when}`;
    button.addEventListener('click', () => onSelect(entry));
    item.appendChild(button);
    list.appendChild(item);
  }
  box.appendChild(list);
  return box;
}

export function renderError(message: string, onRetry: () => void): HTMLElement {
  const card = el('article', 'result status-error');
  card.appendChild(el('h2', 'headline', 'Upload failed'));
  card.appendChild(el('p', 'error-message', message));
  const retry = document.createElement('button');
  retry.type = 'button';
  retry.className = 'retry';
  retry.textContent = 'Retry';
  retry.addEventListener('click', onRetry);
  card.appendChild(retry);
  return card;
}
