/** Client for the recognition service HTTP API. */

export interface VehicleInfo {
  plate: string;
  owner_name: string;
  contact_address: string;
  contact_number: string;
  make: string;
  model: string;
  engine_number: string;
  tax_status: string;
  stolen: boolean;
  complaints: string[];
}

export type ApiStatus = 'ok' | 'no_plate' | 'no_characters' | 'low_confidence';

export interface ApiResponse {
  session_id: string;
  status: ApiStatus;
  plate_text: string | null;
  confidence: number | null;
  vehicle: VehicleInfo | null;
  match_kind: 'exact' | 'fuzzy' | 'none';
}

export class ApiError extends Error {
  constructor(public httpStatus: number, detail: string) {
    super(detail);
  }
}

export async function submitPlate(
  baseUrl: string,
  image: Blob,
  filename: string,
  deviceId: string,
): Promise<ApiResponse> {
  const form = new FormData();
  form.append('image', image, filename);
  form.append('device_id', deviceId);
  const res = await fetch(`${baseUrl}/api/v1/plates`, { method: 'POST', body: form });
  if (!res.ok) {
    const detail = await res
      .json()
      .then((body) => body.detail ?? res.statusText)
      .catch(() => res.statusText);
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as ApiResponse;
}

export async function fetchSession(baseUrl: string, sessionId: string): Promise<ApiResponse> {
  const res = await fetch(`${baseUrl}/api/v1/plates/${sessionId}`);
  if (!res.ok) {
    throw new ApiError(res.status, res.status === 404 ? 'unknown session' : res.statusText);
  }
  return (await res.json()) as ApiResponse;
}
