/** UI state derived entirely from service responses; no scheduling logic lives here. */

import type { BusyIntervalDto, SessionDoc } from './types.js';
import { isoFrom, parseIso, weekStartOf } from './time.js';

export interface ViewState {
  sessionId: string | null;
  doc: SessionDoc | null;
  busy: Record<string, BusyIntervalDto[]>;
  weekStart: number;
  error: string | null;
}

export function initialState(): ViewState {
  return { sessionId: null, doc: null, busy: {}, weekStart: 0, error: null };
}

/**
 * Replace the session document wholesale. The calendar week follows the first
 * suggestion so the interesting part of the horizon is on screen.
 */
export function withSession(state: ViewState, doc: SessionDoc): ViewState {
  const anchor =
    doc.last_suggestions.length > 0
      ? parseIso(doc.last_suggestions[0].start).day
      : parseIso(doc.request.horizon_start).day;
  return { ...state, sessionId: doc.id, doc, weekStart: weekStartOf(anchor), error: null };
}

export function withBusy(state: ViewState, busy: Record<string, BusyIntervalDto[]>): ViewState {
  return { ...state, busy };
}

export function withError(state: ViewState, message: string): ViewState {
  return { ...state, error: message };
}

/** The freebusy query window covering the visible week. */
export function weekWindow(weekStart: number): { from: string; to: string } {
  return { from: isoFrom(weekStart, 0), to: isoFrom(weekStart + 7, 0) };
}
