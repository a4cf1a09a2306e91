/**
 * Wire types for the /api JSON contract, mirrored field-for-field.
 */

export interface FactorInfo {
  id: string;
  name: string;
  kind: 'motivator' | 'demotivator';
  category: string;
}

export interface CategoryInfo {
  id: string;
  name: string;
  side: 'motivator' | 'demotivator';
}

export interface CatalogResponse {
  factors: FactorInfo[];
  categories: CategoryInfo[];
  baseline: Record<string, number>;
}

export interface DescriptiveRow {
  factor_id: string;
  name: string;
  kind: string;
  mean: number;
  sd: number;
  n: number;
}

export interface EvaluateRequest {
  allocation: Record<string, number>;
  scope?: string[];
}

export interface EvaluateResponse {
  p_nb: number;
  p_lr: number;
  p_agg: number;
  cost: number;
  c_norm: number;
  fitness: number;
}

export interface OptimizeParams {
  population?: number;
  generations?: number;
  crossover?: number;
  mutation?: number;
  tournament?: number;
  elites?: number;
}

export interface OptimizeRequest {
  seed: number;
  scope?: string[];
  context?: Record<string, number>;
  params?: OptimizeParams;
}

export interface FitnessBreakdown {
  probability: number;
  cost: number;
  norm_cost: number;
  fitness: number;
}

export interface OptimizeResult {
  best: Record<string, number>;
  best_report: FitnessBreakdown;
  baseline_report: FitnessBreakdown;
  delta_fitness: number;
  scope: string[];
  context: Record<string, number>;
  seed: number;
}

export type JobPhase = 'running' | 'done' | 'failed';

export interface JobStatus {
  id: string;
  status: JobPhase;
  trajectory: number[];
  result: OptimizeResult | null;
  error: string | null;
}

/** One slider: its level plus whether it is pinned as GA context. */
export interface FactorSliderState {
  factorId: string;
  level: number;
  locked: boolean;
}
