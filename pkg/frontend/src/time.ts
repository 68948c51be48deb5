/** Calendar math over the service's timestamp format (YYYY-MM-DDTHH:MM). */

// Day 0 of the scheduling calendar; conveniently a Monday.
export const EPOCH_UTC = Date.UTC(2024, 0, 1);

const MINUTES_PER_DAY = 24 * 60;
const ISO_RE = /^(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2})$/;

/** A point in time as the service sees it: whole days since the epoch plus minutes within the day. */
export interface Moment {
  day: number;
  minute: number;
}

export function parseIso(text: string): Moment {
  const m = ISO_RE.exec(text);
  if (!m) {
    throw new Error(`bad timestamp: ${text}`);
  }
  const [, year, month, dayOfMonth, hour, minute] = m;
  const utc = Date.UTC(Number(year), Number(month) - 1, Number(dayOfMonth));
  const day = Math.round((utc - EPOCH_UTC) / 86_400_000);
  return { day, minute: Number(hour) * 60 + Number(minute) };
}

export function isoFrom(day: number, minute: number): string {
  const date = new Date(EPOCH_UTC + day * 86_400_000 + minute * 60_000);
  const pad = (n: number) => String(n).padStart(2, '0');
  return (
    `${date.getUTCFullYear()}-${pad(date.getUTCMonth() + 1)}-${pad(date.getUTCDate())}` +
    `T${pad(date.getUTCHours())}:${pad(date.getUTCMinutes())}`
  );
}

/** Minutes since the epoch, for interval comparisons. */
export function totalMinutes(moment: Moment): number {
  return moment.day * MINUTES_PER_DAY + moment.minute;
}

/** Monday of the week containing `day`; day 0 is a Monday, so this is plain modulo. */
export function weekStartOf(day: number): number {
  return day - (((day % 7) + 7) % 7);
}

const WEEKDAY_NAMES = ['Mon', 'Tue', 'Wed', 'Thu', 'Fri', 'Sat', 'Sun'];

/** Short label for a calendar column header, e.g. "Mon 01-01". */
export function dayLabel(day: number): string {
  const iso = isoFrom(day, 0);
  return `${WEEKDAY_NAMES[((day % 7) + 7) % 7]} ${iso.slice(5, 10)}`;
}

/** "13:30" from minutes since midnight. */
export function minuteLabel(minute: number): string {
  const pad = (n: number) => String(n).padStart(2, '0');
  return `${pad(Math.floor(minute / 60))}:${pad(minute % 60)}`;
}
