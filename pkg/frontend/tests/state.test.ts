import { beforeEach, describe, expect, it } from "vitest";
import {
  LatestWins,
  addRecent,
  clampPollInterval,
  getBookmarks,
  getRecents,
  isBookmarked,
  toggleBookmark,
} from "../src/state.js";

beforeEach(() => localStorage.clear());

describe("bookmarks", () => {
  it("toggles on and off and persists", () => {
    expect(toggleBookmark("s1")).toBe(true);
    expect(isBookmarked("s1")).toBe(true);
    expect(getBookmarks()).toEqual(["s1"]);
    expect(toggleBookmark("s1")).toBe(false);
    expect(getBookmarks()).toEqual([]);
  });

  it("survives corrupted storage", () => {
    localStorage.setItem("transitlive.bookmarks", "{not json");
    expect(getBookmarks()).toEqual([]);
  });
});

describe("recents", () => {
  it("moves a revisited stop to the front and caps the list", () => {
    for (let i = 0; i < 10; i++) addRecent(`s${i}`);
    addRecent("s3");
    const recents = getRecents();
    expect(recents[0]).toBe("s3");
    expect(recents).toHaveLength(8);
  });
});

describe("clampPollInterval", () => {
  it("enforces the minimum and defaults zero", () => {
    expect(clampPollInterval(1)).toBe(2);
    expect(clampPollInterval(30)).toBe(30);
    expect(clampPollInterval(0)).toBe(10);
  });
});

describe("LatestWins", () => {
  it("drops responses that arrive after a newer one was applied", () => {
    const seq = new LatestWins();
    const first = seq.next();
    const second = seq.next();
    expect(seq.accept(second)).toBe(true);
    expect(seq.accept(first)).toBe(false);
  });
});
