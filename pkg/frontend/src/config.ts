/** Server base URL resolution: ?server= query param, then localStorage,
 * then same-origin default for a client served next to the API. */

const STORAGE_KEY = 'platescan-server';
const DEFAULT_BASE = 'http://localhost:8080';

export function serverBaseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('server');
  if (fromQuery) {
    localStorage.setItem(STORAGE_KEY, fromQuery);
    return fromQuery.replace(/\/$/, '');
  }
  const stored = localStorage.getItem(STORAGE_KEY);
  return (stored ?? DEFAULT_BASE).replace(/\/$/, '');
}
