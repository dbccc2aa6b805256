export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function fmtCount(n: number): string {
  return n.toLocaleString("en-US");
}

/** Signed percent with one decimal, e.g. +12.5% / -3.0% / 0.0% */
export function fmtDelta(share: number): string {
  const pct = share * 100;
  const sign = pct > 0 ? "+" : "";
  return `${sign}${pct.toFixed(1)}%`;
}

export function fmtPct(share: number): string {
  return `${(share * 100).toFixed(1)}%`;
}
