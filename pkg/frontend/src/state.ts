// Client-side console state: bookmarks and recent stops persist across
// reloads via localStorage; poll responses resolve last-write-wins by
// request sequence number.

const BOOKMARKS_KEY = "transitlive.bookmarks";
const RECENTS_KEY = "transitlive.recents";
const MAX_RECENTS = 8;
export const MIN_POLL_INTERVAL_S = 2;
export const DEFAULT_POLL_INTERVAL_S = 10;

function readList(key: string): string[] {
  try {
    const raw = localStorage.getItem(key);
    const parsed = raw ? JSON.parse(raw) : [];
    return Array.isArray(parsed) ? parsed.filter((x) => typeof x === "string") : [];
  } catch {
    return [];
  }
}

function writeList(key: string, value: string[]): void {
  localStorage.setItem(key, JSON.stringify(value));
}

export function getBookmarks(): string[] {
  return readList(BOOKMARKS_KEY);
}

export function toggleBookmark(stopId: string): boolean {
  const bookmarks = getBookmarks();
  const idx = bookmarks.indexOf(stopId);
  if (idx >= 0) {
    bookmarks.splice(idx, 1);
    writeList(BOOKMARKS_KEY, bookmarks);
    return false;
  }
  bookmarks.push(stopId);
  writeList(BOOKMARKS_KEY, bookmarks);
  return true;
}

export function isBookmarked(stopId: string): boolean {
  return getBookmarks().includes(stopId);
}

export function getRecents(): string[] {
  return readList(RECENTS_KEY);
}

export function addRecent(stopId: string): void {
  const recents = getRecents().filter((s) => s !== stopId);
  recents.unshift(stopId);
  writeList(RECENTS_KEY, recents.slice(0, MAX_RECENTS));
}

export function clampPollInterval(seconds: number): number {
  return Math.max(MIN_POLL_INTERVAL_S, seconds || DEFAULT_POLL_INTERVAL_S);
}

/** Drops responses that arrive after a newer request has been issued. */
export class LatestWins {
  private issued = 0;
  private applied = 0;

  next(): number {
    return ++this.issued;
  }

  accept(seq: number): boolean {
    if (seq <= this.applied) return false;
    this.applied = seq;
    return true;
  }
}
