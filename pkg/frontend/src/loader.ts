/** Fetch and validate the snapshot file family.
 *
 * Every failure is recorded per file and never thrown: a bundle with holes
 * still renders, each view degrading to its own empty state.
 */

import type { LoadError, SnapshotBundle } from "./types.js";

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

const REQUIRED_KEYS: Record<string, string[]> = {
  "meta.json": [
    "generated_at",
    "window_days",
    "total_posts",
    "unique_users",
    "top_hashtags",
    "top_emojis",
    "languages",
  ],
  "activity.json": ["days"],
  "sentiment.json": ["days"],
  "emotion.json": ["days"],
  "topics.json": ["topics"],
  "hashtags.json": ["nodes", "edges"],
  "emojis.json": ["nodes", "edges"],
  "manifest.json": ["files"],
};

const SLOT: Record<string, keyof Omit<SnapshotBundle, "errors">> = {
  "meta.json": "meta",
  "activity.json": "activity",
  "sentiment.json": "sentiment",
  "emotion.json": "emotion",
  "topics.json": "topics",
  "hashtags.json": "hashtags",
  "emojis.json": "emojis",
  "manifest.json": "manifest",
};

function validate(file: string, doc: unknown): string | null {
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    return "not a JSON object";
  }
  const missing = REQUIRED_KEYS[file].filter((k) => !(k in (doc as object)));
  return missing.length ? `missing keys: ${missing.join(", ")}` : null;
}

export async function loadBundle(
  baseUrl: string,
  fetchFn: FetchLike = fetch,
): Promise<SnapshotBundle> {
  const base = baseUrl.endsWith("/") ? baseUrl : baseUrl + "/";
  const bundle: SnapshotBundle = { errors: [] };
  const files = Object.keys(SLOT);
  const results = await Promise.all(
    files.map(async (file): Promise<[string, unknown | LoadError]> => {
      try {
        const resp = await fetchFn(base + file);
        if (!resp.ok) {
          return [file, { file, reason: `HTTP ${resp.status}` }];
        }
        const doc = await resp.json();
        const bad = validate(file, doc);
        return bad ? [file, { file, reason: bad }] : [file, doc];
      } catch (err) {
        return [file, { file, reason: err instanceof Error ? err.message : String(err) }];
      }
    }),
  );
  for (const [file, result] of results) {
    if (result !== null && typeof result === "object" && "reason" in (result as object)) {
      bundle.errors.push(result as LoadError);
    } else {
      (bundle as Record<string, unknown>)[SLOT[file]] = result;
    }
  }
  return bundle;
}

export function errorFor(bundle: SnapshotBundle, file: string): LoadError | undefined {
  return bundle.errors.find((e) => e.file === file);
}
