/** App wiring: capture/pick an image, submit it, render the dossier. */

import { ApiError, fetchSession, submitPlate } from './api.js';
import { serverBaseUrl } from './config.js';
import { addToHistory, deviceId, getHistory, updateEntry, type HistoryEntry } from './history.js';
import { renderError, renderHistoryList, renderResult } from './view.js';

function readAsDataUrl(file: Blob): Promise<string> {
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(String(reader.result));
    reader.onerror = () => reject(reader.error);
    reader.readAsDataURL(file);
  });
}

export function initApp(root: HTMLElement): void {
  const base = serverBaseUrl();
  root.innerHTML = `
    <header>
      <h1>platescan</h1>
      <p class="tagline">Capture a license plate, get the vehicle dossier.</p>
    </header>
    <form class="capture">
      <label class="file-label">
        <input type="file" id="image-input" accept="image/*" capture="environment" />
        Take or choose a photo
      </label>
      <button type="submit" id="submit-button" disabled>Submit</button>
    </form>
    <div id="result-slot"></div>
    <div id="history-slot"></div>
  `;

  const input = root.querySelector<HTMLInputElement>('#image-input')!;
  const submit = root.querySelector<HTMLButtonElement>('#submit-button')!;
  const resultSlot = root.querySelector<HTMLElement>('#result-slot')!;
  const historySlot = root.querySelector<HTMLElement>('#history-slot')!;

  function refreshHistory(): void {
    historySlot.replaceChildren(renderHistoryList(getHistory(), revisit));
  }

  async function revisit(entry: HistoryEntry): Promise<void> {
    try {
      const fresh = await fetchSession(base, entry.response.session_id);
      updateEntry(entry.response.session_id, { response: fresh, expired: false });
    } catch (err) {
      if (err instanceof ApiError && err.httpStatus === 404) {
        updateEntry(entry.response.session_id, { expired: true });
      }
    }
    const current = getHistory().find(
      (e) => e.response.session_id === entry.response.session_id,
    );
    if (current) {
      resultSlot.replaceChildren(renderResult(current));
    }
    refreshHistory();
  }

  input.addEventListener('change', () => {
    submit.disabled = !input.files || input.files.length === 0;
  });

  root.querySelector('form.capture')!.addEventListener('submit', async (event) => {
    event.preventDefault();
    const file = input.files?.[0];
    if (!file) {
      return;
    }
    submit.disabled = true; // one in-flight upload at a time
    submit.textContent = 'Uploading…';
    try {
      const response = await submitPlate(base, file, file.name || 'capture.jpg', deviceId());
      const entry: HistoryEntry = {
        response,
        thumbnail: await readAsDataUrl(file),
        submittedAt: new Date().toISOString(),
      };
      addToHistory(entry); // only successful round-trips enter the history
      resultSlot.replaceChildren(renderResult(entry));
      refreshHistory();
    } catch (err) {
      const message = err instanceof ApiError
        ? `${err.message} (HTTP ${err.httpStatus})`
        : 'Network error — is the server reachable?';
      resultSlot.replaceChildren(renderError(message, () => {
        root.querySelector('form.capture')!.dispatchEvent(new Event('submit'));
      }));
    } finally {
      submit.textContent = 'Submit';
      submit.disabled = !input.files || input.files.length === 0;
    }
  });

  refreshHistory();
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  initApp(document.getElementById('app')!);
}
