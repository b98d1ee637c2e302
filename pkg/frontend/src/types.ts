// Shapes of the gateway's JSON payloads. The panel renders these verbatim;
// it never derives control decisions of its own.

export interface PredictionInfo {
  probs: number[];
  bits: string;
  label: number;
}

export interface ModelInfo {
  n: number;
  feature_dim: number;
  classes: number;
}

export interface Snapshot {
  switches: string;
  controls: string;
  mode: "manual" | "manual_training" | "automation";
  degraded: boolean;
  settle_until: number;
  prediction_window: number[];
  majority_k: number;
  n: number;
  scene: string;
  run: number;
  frame_id: number;
  frame_period: number;
  last_prediction: PredictionInfo | null;
  dataset_size: number;
  model: ModelInfo;
  paused: boolean;
  rate: number;
  sim_time: number;
}

export interface GatewayEvent {
  timestamp: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface CatalogEntry {
  id: string;
  description: string;
  output: string;
  shots: number;
}

export interface TrainResult {
  loss_trace: number[];
  samples: number;
  epochs: number;
  model: { n: number; feature_dim: number };
}
