/** Shared types mirroring the service's JSON payloads. */

export interface EvidenceUtterance {
  index: number;
  speaker: string;
  alternatives: string[];
}

export type ItemStatus = 'Pending' | 'Approved' | 'Corrected';

export interface ReviewItem {
  item_id: string;
  run_id: string;
  call_id: string;
  field_id: string;
  live_call_value: string;
  verdict: string;
  strategy: string;
  score: number;
  evidence: EvidenceUtterance[];
  status: ItemStatus;
  corrected_value: string | null;
  version: number;
}

export interface QueuePage {
  items: ReviewItem[];
  total: number;
  page: number;
}

export interface FieldInfo {
  field_id: string;
  format_pattern: string;
  criticality: string;
}

export interface RunInfo {
  run_id: string;
  status: string;
  strategy: string;
  decision_count: number;
  flagged_count: number;
  error: string | null;
  item_counts: Record<ItemStatus, number>;
}

export interface QueueFilters {
  status?: ItemStatus;
  field?: string;
  run?: string;
}
