/**
 * Browser entry point. All state comes from the service: every mutation is
 * followed by a full GET of the session plus a freebusy refresh, so reloading
 * the page reproduces exactly what the last render showed.
 */

import { ApiClient, ApiError } from './api.js';
import { initialState, weekWindow, withBusy, withError, withSession, type ViewState } from './state.js';
import { renderCalendar, renderChat, renderConstraintPanel, renderSuggestionCards } from './render.js';
import type { BusyIntervalDto } from './types.js';

const api = new ApiClient('');
let state: ViewState = initialState();

const el = (id: string) => document.getElementById(id) as HTMLElement;
const input = (id: string) => document.getElementById(id) as HTMLInputElement;

function paint(): void {
  el('error').textContent = state.error ?? '';
  if (!state.doc) {
    el('session-label').textContent = 'no session';
    el('chat-log').innerHTML = '';
    el('suggestions').innerHTML = '';
    el('constraints').innerHTML = '';
    el('calendar-pane').innerHTML = renderCalendar(state.weekStart, {}, []);
    return;
  }
  el('session-label').textContent = `${state.doc.id} (${state.doc.status})`;
  el('chat-log').innerHTML = renderChat(state.doc.chat);
  el('suggestions').innerHTML = renderSuggestionCards(state.doc.last_suggestions, state.doc.status);
  el('constraints').innerHTML = renderConstraintPanel(state.doc.constraints);
  el('calendar-pane').innerHTML = renderCalendar(state.weekStart, state.busy, state.doc.last_suggestions);
  const log = el('chat-log');
  log.scrollTop = log.scrollHeight;
}

async function refresh(sessionId: string): Promise<void> {
  const doc = await api.getSession(sessionId);
  state = withSession(state, doc);
  const window = weekWindow(state.weekStart);
  const busy: Record<string, BusyIntervalDto[]> = {};
  for (const person of doc.request.attendees) {
    const response = await api.getFreeBusy(person, window.from, window.to);
    busy[person] = response.busy;
  }
  state = withBusy(state, busy);
}

async function guarded(action: () => Promise<void>): Promise<void> {
  try {
    await action();
  } catch (error) {
    const message = error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
    state = withError(state, message);
  }
  paint();
}

async function populatePeople(): Promise<void> {
  const people = await api.getPeople();
  const organizer = document.getElementById('organizer') as HTMLSelectElement;
  const attendees = document.getElementById('attendees') as HTMLSelectElement;
  for (const person of people) {
    for (const select of [organizer, attendees]) {
      const option = document.createElement('option');
      option.value = person.id;
      option.textContent = `${person.name} (${person.id})`;
      select.appendChild(option);
    }
  }
}

function selectedAttendees(): string[] {
  const select = document.getElementById('attendees') as HTMLSelectElement;
  return Array.from(select.selectedOptions).map((option) => option.value);
}

async function onOpen(event: Event): Promise<void> {
  event.preventDefault();
  await guarded(async () => {
    const opened = await api.openSession({
      organizer: (document.getElementById('organizer') as HTMLSelectElement).value,
      attendees: selectedAttendees(),
      duration_minutes: Number(input('duration').value),
      horizon_start: input('horizon-start').value,
      horizon_end: input('horizon-end').value,
      k: Number(input('suggestion-count').value) || 1,
    });
    location.hash = opened.session_id;
    await refresh(opened.session_id);
  });
}

async function onSend(event: Event): Promise<void> {
  event.preventDefault();
  const text = input('chat-input').value.trim();
  if (!text || !state.sessionId) {
    return;
  }
  input('chat-input').value = '';
  await guarded(async () => {
    await api.sendMessage(state.sessionId as string, text);
    await refresh(state.sessionId as string);
  });
}

async function onSuggestionClick(event: Event): Promise<void> {
  const target = event.target as HTMLElement;
  if (!target.matches('button.schedule') || target.hasAttribute('disabled') || !state.sessionId) {
    return;
  }
  const index = Number(target.dataset.index);
  await guarded(async () => {
    await api.schedule(state.sessionId as string, index);
    await refresh(state.sessionId as string);
  });
}

async function boot(): Promise<void> {
  el('open-form').addEventListener('submit', (e) => void onOpen(e));
  el('chat-form').addEventListener('submit', (e) => void onSend(e));
  el('suggestions').addEventListener('click', (e) => void onSuggestionClick(e));
  await guarded(async () => {
    await populatePeople();
    const fromHash = location.hash.replace(/^#/, '');
    if (fromHash) {
      await refresh(fromHash);
    }
  });
}

void boot();
