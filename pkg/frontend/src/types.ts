/** Wire shapes for the scheduling service; field names match the JSON exactly. */

export interface SuggestionDto {
  start: string;
  end: string;
  score: number;
  satisfied: string[];
  unsatisfied: string[];
  attendee_availability: Record<string, boolean>;
  explanation: string;
}

export interface ConstraintDto {
  id: string;
  rank: number;
  nl_text: string;
  dsl_source: string;
}

export interface ChatEntryDto {
  speaker: 'user' | 'assistant';
  text: string;
  timestamp: number;
}

export interface SessionRequestDto {
  organizer: string;
  attendees: string[];
  duration_minutes: number;
  horizon_start: string;
  horizon_end: string;
  suggestion_count: number;
}

/** Full persisted session, as returned by GET /sessions/{id}. */
export interface SessionDoc {
  id: string;
  request: SessionRequestDto;
  constraints: ConstraintDto[];
  chat: ChatEntryDto[];
  last_suggestions: SuggestionDto[];
  status: 'open' | 'scheduled' | 'abandoned';
}

export interface OpenSessionBody {
  organizer: string;
  attendees: string[];
  duration_minutes: number;
  horizon_start: string;
  horizon_end: string;
  k?: number;
}

export interface OpenSessionResponse {
  session_id: string;
  suggestions: SuggestionDto[];
  constraints: ConstraintDto[];
}

export interface MessageResponse {
  message: string | null;
  suggestions: SuggestionDto[];
  constraints: ConstraintDto[];
}

export interface BusyIntervalDto {
  start: string;
  end: string;
}

export interface FreeBusyResponse {
  person: string;
  busy: BusyIntervalDto[];
}

export interface PersonDto {
  id: string;
  name: string;
  role: string;
  team_id: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
