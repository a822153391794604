// JSON mirrors of the server types crossing the API.

export type Variant = "DESIGN" | "EXAM" | "ANSWERED";
export type Kind = "MCQ" | "STRUCT";

export interface OptionMirror {
  label: string;
  text: string;
}

export interface QuestionMirror {
  number: number;
  kind: Kind;
  stem: string;
  options: OptionMirror[];
  key: string | null;
  answer_lines: number | null;
  model: string | null;
  response: string | null;
}

export interface PaperMirror {
  id: string;
  title: string;
  duration_minutes: number;
  variant: Variant;
  author: string;
  questions: QuestionMirror[];
}

export type Phase =
  | "IDLE"
  | "AWAITING_PAPER"
  | "PASSKEY_REQUIRED"
  | "ENV_CHECK"
  | "IN_EXAM"
  | "SUBMITTED"
  | "EXPIRED"
  | "UPLOADED"
  | "FAILED";

export interface SessionState {
  phase: Phase;
  attempts: number;
  violations: string[];
  warnings: string[];
  remaining_seconds: number;
  answers: Record<string, string>;
  paper: PaperMirror | null;
  error: string | null;
  failure: string | null;
}

export interface MarkRow {
  number: number;
  kind: Kind;
  awarded: number | null;
  max: number;
  response: string | null;
}

export interface MarkReport {
  paper: string;
  rows: MarkRow[];
  totals: { auto: number; manual: number; pending: number; total: number; max: number };
  summary: string;
}

export interface GestureEventRecord {
  kind: string;
  start_ms: number;
  end_ms: number;
  severity: string;
  comment: string;
}

export interface ReturnSummary {
  id: string;
  student: string;
  paper: string;
  marked: boolean;
}

export interface ReturnReport {
  mark: MarkReport | null;
  attestation: Record<string, unknown>;
  gesture: {
    frame_count: number;
    present_frames: number;
    present_ratio: number;
    start_ms: number;
    end_ms: number;
    events: GestureEventRecord[];
  };
}
