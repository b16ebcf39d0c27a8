import type { ApiResponse, VehicleInfo } from '../src/api.js';
import type { HistoryEntry } from '../src/history.js';

export function vehicle(overrides: Partial<VehicleInfo> = {}): VehicleInfo {
  return {
    plate: 'KA05NB1234',
    owner_name: 'A. Sharma',
    contact_address: '12 MG Road, Bengaluru',
    contact_number: '+91 98xxxx1234',
    make: 'Maruti',
    model: 'Swift',
    engine_number: 'K12M1234567',
    tax_status: 'paid',
    stolen: false,
    complaints: [],
    ...overrides,
  };
}

export function okResponse(overrides: Partial<ApiResponse> = {}): ApiResponse {
  return {
    session_id: 'a'.repeat(32),
    status: 'ok',
    plate_text: 'KA05NB1234',
    confidence: 0.91,
    vehicle: vehicle(),
    match_kind: 'exact',
    ...overrides,
  };
}

export function noPlateResponse(): ApiResponse {
  return {
    session_id: 'b'.repeat(32),
    status: 'no_plate',
    plate_text: null,
    confidence: null,
    vehicle: null,
    match_kind: 'none',
  };
}

export function stolenResponse(): ApiResponse {
  return okResponse({
    session_id: 'c'.repeat(32),
    vehicle: vehicle({ stolen: true, complaints: ['theft FIR 2024/118'] }),
  });
}

export function entry(response: ApiResponse, extra: Partial<HistoryEntry> = {}): HistoryEntry {
  return {
    response,
    thumbnail: 'data:image/png;base64,',
    submittedAt: '2026-08-09T10:00:00Z',
    ...extra,
  };
}
