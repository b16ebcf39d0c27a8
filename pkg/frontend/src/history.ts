/** Local capture history and the per-browser device identity. */

import type { ApiResponse } from './api.js';

const DEVICE_KEY = 'platescan-device-id';
const HISTORY_KEY = 'platescan-history';
const MAX_HISTORY = 50;

export interface HistoryEntry {
  response: ApiResponse;
  thumbnail: string; // data URL of the submitted image
  submittedAt: string;
  expired?: boolean;
}

export function deviceId(): string {
  let id = localStorage.getItem(DEVICE_KEY);
  if (!id) {
    id = crypto.randomUUID();
    localStorage.setItem(DEVICE_KEY, id);
  }
  return id;
}

export function getHistory(): HistoryEntry[] {
  try {
    const raw = localStorage.getItem(HISTORY_KEY);
    return raw ? (JSON.parse(raw) as HistoryEntry[]) : [];
  } catch {
    return [];
  }
}

export function addToHistory(entry: HistoryEntry): void {
  const history = getHistory();
  history.unshift(entry); // newest first
  localStorage.setItem(HISTORY_KEY, JSON.stringify(history.slice(0, MAX_HISTORY)));
}

export function updateEntry(sessionId: string, patch: Partial<HistoryEntry>): void {
  const history = getHistory();
  const index = history.findIndex((e) => e.response.session_id === sessionId);
  if (index >= 0) {
    history[index] = { ...history[index], ...patch };
    localStorage.setItem(HISTORY_KEY, JSON.stringify(history));
  }
}

export function clearHistory(): void {
  localStorage.removeItem(HISTORY_KEY);
}
