/** Browser entry: fetch the snapshot bundle and render all views.
 *
 * The only network traffic is the snapshot file fetches; the base
 * directory comes from the ?data= query parameter (default "snapshots").
 */

import { errorFor, loadBundle } from "./loader.js";
import type { SnapshotBundle } from "./types.js";
import {
  activityView,
  cloudView,
  compareView,
  overviewView,
  topicsView,
  trendView,
} from "./views.js";

function put(id: string, html: string): void {
  const el = document.getElementById(id);
  if (el) el.innerHTML = html;
}

function reason(bundle: SnapshotBundle, file: string): string | undefined {
  return errorFor(bundle, file)?.reason;
}

function renderAll(bundle: SnapshotBundle): void {
  put("overview", overviewView(bundle));
  put("activity", activityView(bundle.activity, reason(bundle, "activity.json")));
  put("sentiment", trendView(bundle.sentiment, "sentiment", reason(bundle, "sentiment.json")));
  put("emotion", trendView(bundle.emotion, "emotion", reason(bundle, "emotion.json")));
  put("topics", topicsView(bundle.topics, reason(bundle, "topics.json")));
  put("hashtags", cloudView(bundle.hashtags, "hashtags", reason(bundle, "hashtags.json")));
  put("emojis", cloudView(bundle.emojis, "emojis", reason(bundle, "emojis.json")));
  renderComparison(bundle);
  const stamp = bundle.meta ? `window of ${bundle.meta.window_days} days, data through ${bundle.meta.generated_at}` : "";
  put("generated-at", stamp);
}

function renderComparison(bundle: SnapshotBundle): void {
  const kindSel = document.getElementById("compare-kind") as HTMLSelectElement | null;
  const selects = ["a-start", "a-end", "b-start", "b-end"].map(
    (id) => document.getElementById(`compare-${id}`) as HTMLSelectElement | null,
  );
  if (!kindSel || selects.some((s) => !s)) return;
  const doc = kindSel.value === "emotion" ? bundle.emotion : bundle.sentiment;
  const days = doc?.days ?? [];

  for (const sel of selects as HTMLSelectElement[]) {
    const prev = sel.value;
    sel.innerHTML = days
      .map((d, i) => `<option value="${i}">${d.date}</option>`)
      .join("");
    if (prev !== "" && Number(prev) < days.length) sel.value = prev;
  }
  const [aStart, aEnd, bStart, bEnd] = selects as HTMLSelectElement[];
  if (days.length && aEnd.value === aStart.value && bStart.value === aStart.value) {
    // first render: default to first half vs second half
    const mid = Math.floor((days.length - 1) / 2);
    aStart.value = "0";
    aEnd.value = String(mid);
    bStart.value = String(Math.min(mid + 1, days.length - 1));
    bEnd.value = String(days.length - 1);
  }
  const file = kindSel.value === "emotion" ? "emotion.json" : "sentiment.json";
  put(
    "compare-result",
    compareView(
      doc,
      kindSel.value === "emotion" ? "emotion" : "sentiment",
      { start: Number(aStart.value) || 0, end: Number(aEnd.value) || 0 },
      { start: Number(bStart.value) || 0, end: Number(bEnd.value) || 0 },
      reason(bundleRef!, file),
    ),
  );
}

let bundleRef: SnapshotBundle | null = null;

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("data") ?? "snapshots";
  bundleRef = await loadBundle(base);
  renderAll(bundleRef);
  for (const id of ["compare-kind", "compare-a-start", "compare-a-end", "compare-b-start", "compare-b-end"]) {
    document.getElementById(id)?.addEventListener("change", () => {
      if (bundleRef) renderComparison(bundleRef);
    });
  }
}

boot().catch((err) => {
  // never page-fatal: show what happened and keep empty states visible
  put("overview", `<div class="empty-state">failed to load snapshots: ${String(err)}</div>`);
});
