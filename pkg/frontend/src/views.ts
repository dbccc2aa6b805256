/** View builders: snapshot documents in, HTML strings out.
 *
 * Pure string rendering keeps every view testable in node. Each view
 * renders an empty state when its file is missing or failed to load; no
 * view ever throws. Every number shown comes straight from a loaded JSON
 * field except the comparison deltas, which are count-share differences
 * computed from the displayed day rows.
 */

import { compareRanges, DayRange } from "./compare.js";
import { escapeHtml, fmtCount, fmtDelta, fmtPct } from "./format.js";
import type {
  ActivityDoc,
  CountsDoc,
  GraphDoc,
  SnapshotBundle,
  TopicsDoc,
} from "./types.js";

const SENTIMENT_COLORS: Record<string, string> = {
  positive: "#2e9e5b",
  neutral: "#8a8f98",
  negative: "#d64550",
};

const EMOTION_COLORS: Record<string, string> = {
  anger: "#d64550",
  disgust: "#7a9e2e",
  fear: "#8257d6",
  joy: "#e8a717",
  neutral: "#8a8f98",
  sadness: "#4575d6",
  surprise: "#2eb5a0",
};

function color(label: string, palette: Record<string, string>): string {
  return palette[label] ?? "#b08bd0";
}

export function emptyState(view: string, reason?: string): string {
  const detail = reason ? ` <span class="reason">(${escapeHtml(reason)})</span>` : "";
  return `<div class="empty-state">No data for ${escapeHtml(view)} yet${detail}</div>`;
}

export function overviewView(bundle: SnapshotBundle): string {
  const meta = bundle.meta;
  if (!meta) return emptyState("overview", reasonFor(bundle, "meta.json"));
  const emotionTotals = bundle.emotion ? sumDays(bundle.emotion) : {};
  const topEmotions = Object.entries(emotionTotals)
    .sort(([la, ca], [lb, cb]) => cb - ca || la.localeCompare(lb))
    .slice(0, 3);
  const tags = meta.top_hashtags.slice(0, 8);
  const langs = Object.entries(meta.languages).sort(([, a], [, b]) => b - a);
  return `
  <div class="stat-grid">
    <div class="stat"><div class="stat-value" id="total-posts">${fmtCount(meta.total_posts)}</div>
      <div class="stat-label">posts in the last ${meta.window_days} days</div></div>
    <div class="stat"><div class="stat-value">${fmtCount(meta.unique_users)}</div>
      <div class="stat-label">unique users</div></div>
    <div class="stat"><div class="stat-value">${topEmotions.map(([l]) => escapeHtml(l)).join(", ") || "–"}</div>
      <div class="stat-label">top emotions</div></div>
    <div class="stat"><div class="stat-value">${tags.map((t) => "#" + escapeHtml(t.item)).join(" ") || "–"}</div>
      <div class="stat-label">trending hashtags</div></div>
    <div class="stat"><div class="stat-value">${
      langs.map(([l, c]) => `${escapeHtml(l)} <small>${fmtCount(c)}</small>`).join(" · ") || "–"
    }</div>
      <div class="stat-label">language usage</div></div>
  </div>`;
}

function sumDays(doc: CountsDoc): Record<string, number> {
  const out: Record<string, number> = {};
  for (const day of doc.days) {
    for (const [label, count] of Object.entries(day.counts)) {
      out[label] = (out[label] ?? 0) + count;
    }
  }
  return out;
}

export function activityView(doc: ActivityDoc | undefined, reason?: string): string {
  if (!doc) return emptyState("activity", reason);
  const peak = Math.max(1, ...doc.days.map((d) => d.posts));
  const bars = doc.days
    .map(
      (d) => `
    <div class="day-col" title="${d.date}: ${d.posts} posts, ${d.users} users">
      <div class="bar" style="height:${(d.posts / peak) * 100}%"></div>
      <div class="day-label">${d.date.slice(5)}</div>
    </div>`,
    )
    .join("");
  return `<div class="chart bar-chart">${bars}</div>`;
}

export function trendView(
  doc: CountsDoc | undefined,
  kind: "sentiment" | "emotion",
  reason?: string,
): string {
  if (!doc) return emptyState(kind + " trends", reason);
  const palette = kind === "sentiment" ? SENTIMENT_COLORS : EMOTION_COLORS;
  const peak = Math.max(
    1,
    ...doc.days.map((d) => Object.values(d.counts).reduce((s, v) => s + v, 0)),
  );
  const columns = doc.days
    .map((day) => {
      const total = Object.values(day.counts).reduce((s, v) => s + v, 0);
      const segments = Object.entries(day.counts)
        .filter(([, count]) => count > 0)
        .sort(([a], [b]) => a.localeCompare(b))
        .map(
          ([label, count]) => `
        <div class="segment" style="height:${(count / peak) * 100}%;background:${color(label, palette)}"
             title="${day.date} ${escapeHtml(label)}: ${count}"></div>`,
        )
        .join("");
      return `
    <div class="day-col" title="${day.date}: ${total} posts">
      <div class="stack">${segments}</div>
      <div class="day-label">${day.date.slice(5)}</div>
    </div>`;
    })
    .join("");
  const legend = Object.keys(palette)
    .map(
      (label) =>
        `<span class="legend-item"><span class="swatch" style="background:${palette[label]}"></span>${label}</span>`,
    )
    .join("");
  return `<div class="chart stacked-chart">${columns}</div><div class="legend">${legend}</div>`;
}

export function topicsView(doc: TopicsDoc | undefined, reason?: string): string {
  if (!doc) return emptyState("topics", reason);
  if (!doc.topics.length) return emptyState("topics");
  const cards = doc.topics
    .map((topic) => {
      const name = topic.topic_id === -1 ? "unassigned" : `topic ${topic.topic_id}`;
      const keywords = topic.keywords.length
        ? topic.keywords.map((k) => `<span class="keyword">${escapeHtml(k)}</span>`).join(" ")
        : "<em>no keywords</em>";
      const affect = affectStrip(topic.sentiment_counts, SENTIMENT_COLORS);
      const emotions = topAffect(topic.emotion_counts);
      return `
    <div class="topic-card">
      <div class="topic-head"><strong>${name}</strong><span class="count">${fmtCount(topic.count)} posts</span></div>
      <div class="keywords">${keywords}</div>
      ${affect}
      <div class="topic-emotions">${emotions}</div>
    </div>`;
    })
    .join("");
  return `<div class="topic-grid">${cards}</div>`;
}

function affectStrip(counts: Record<string, number>, palette: Record<string, string>): string {
  const total = Object.values(counts).reduce((s, v) => s + v, 0);
  if (total === 0) return '<div class="affect-strip affect-empty"></div>';
  const parts = Object.entries(counts)
    .filter(([, v]) => v > 0)
    .sort(([a], [b]) => a.localeCompare(b))
    .map(
      ([label, v]) =>
        `<div class="affect" style="width:${(v / total) * 100}%;background:${color(label, palette)}"
          title="${escapeHtml(label)}: ${v} (${fmtPct(v / total)})"></div>`,
    )
    .join("");
  return `<div class="affect-strip">${parts}</div>`;
}

function topAffect(counts: Record<string, number>): string {
  const ranked = Object.entries(counts)
    .filter(([, v]) => v > 0)
    .sort(([la, a], [lb, b]) => b - a || la.localeCompare(lb))
    .slice(0, 3);
  if (!ranked.length) return "";
  return ranked.map(([l, v]) => `${escapeHtml(l)} ${fmtCount(v)}`).join(" · ");
}

export function cloudView(doc: GraphDoc | undefined, kind: string, reason?: string): string {
  if (!doc) return emptyState(kind, reason);
  const entries = Object.entries(doc.nodes).sort(([la, a], [lb, b]) => b - a || la.localeCompare(lb));
  if (!entries.length) return emptyState(kind);
  const peak = entries[0][1];
  const cloud = entries
    .slice(0, 60)
    .map(([item, count]) => {
      const scale = 0.8 + 1.6 * Math.sqrt(count / peak);
      return `<span class="cloud-item" style="font-size:${scale.toFixed(2)}em"
        title="${escapeHtml(item)}: ${count}">${escapeHtml(item)}</span>`;
    })
    .join(" ");
  const pairs = [...doc.edges]
    .sort((x, y) => y.weight - x.weight || x.a.localeCompare(y.a) || x.b.localeCompare(y.b))
    .slice(0, 12)
    .map(
      (e) =>
        `<li>${escapeHtml(e.a)} + ${escapeHtml(e.b)} <span class="count">×${e.weight}</span></li>`,
    )
    .join("");
  const pairList = pairs
    ? `<h3>appear together</h3><ul class="pair-list">${pairs}</ul>`
    : "";
  return `<div class="cloud">${cloud}</div>${pairList}`;
}

export function compareView(
  doc: CountsDoc | undefined,
  kind: "sentiment" | "emotion",
  a: DayRange,
  b: DayRange,
  reason?: string,
): string {
  if (!doc) return emptyState(kind + " comparison", reason);
  if (!doc.days.length) return emptyState(kind + " comparison");
  const deltas = compareRanges(doc, a, b);
  const label = (r: DayRange) =>
    r.start === r.end ? doc.days[r.start].date : `${doc.days[r.start].date} … ${doc.days[r.end].date}`;
  const rows = deltas
    .map(
      (d) => `
    <tr>
      <td>${escapeHtml(d.label)}</td>
      <td>${fmtCount(d.countA)} (${fmtPct(d.shareA)})</td>
      <td>${fmtCount(d.countB)} (${fmtPct(d.shareB)})</td>
      <td class="${d.delta > 0 ? "delta-up" : d.delta < 0 ? "delta-down" : ""}">${fmtDelta(d.delta)}</td>
    </tr>`,
    )
    .join("");
  return `
  <table class="compare-table">
    <thead><tr><th>${kind}</th><th>${label(a)}</th><th>${label(b)}</th><th>share Δ</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>
  <p class="footnote">Δ is the difference in count share between the two ranges.</p>`;
}

function reasonFor(bundle: SnapshotBundle, file: string): string | undefined {
  return bundle.errors.find((e) => e.file === file)?.reason;
}
