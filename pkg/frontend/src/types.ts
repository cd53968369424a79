/** Response shapes of the eplab HTTP API (schema_version 1). */

export interface MetricStats {
  mean: number;
  min: number;
  max: number;
  raw: number[];
}

export interface SweepPoint {
  kind?: string;
  delta: number;
  itr_ticks: number;
  workload_kind: string;
  metrics: Record<string, MetricStats>;
}

export interface MarkersResponse {
  schema_version: number;
  digest: string;
  workload_kind: string;
  markers: {
    min_energy: SweepPoint;
    min_latency: SweepPoint;
    best_efficiency?: SweepPoint;
  };
}

export interface SweepPointsResponse {
  schema_version: number;
  digest: string;
  total: number;
  offset: number;
  workload_kind: string;
  points: SweepPoint[];
}

export interface SweepListEntry {
  digest: string;
  names: string[];
  workload_kind: string;
  points: number;
  grid: unknown;
}

export interface TraceListEntry {
  digest: string;
  names: string[];
  span_us: number;
  interrupts: number;
  itr_ticks: number;
  seed: number;
  config_digest: string;
}

export interface TraceWindow {
  t0_us: number;
  t1_us: number;
  interrupts: number;
  rx_bytes: number;
  tx_bytes: number;
  rx_descriptors: number;
  tx_descriptors: number;
  sleep_entries: number;
  sleep_residency_us: number;
  joules: number;
  instructions: number;
  cycles: number;
}

export interface TraceWindowResponse {
  schema_version: number;
  digest: string;
  window_us: number;
  total_windows: number;
  offset: number;
  span_us: number;
  itr_ticks: number;
  windows: TraceWindow[];
  totals: TraceWindow;
}

export interface CurvePoint {
  delta: number;
  norm_latency: number;
  norm_energy: number;
}

export interface EvalModelResponse {
  schema_version: number;
  points: CurvePoint[];
}

export interface ApiFieldError {
  field: string;
  message: string;
}
