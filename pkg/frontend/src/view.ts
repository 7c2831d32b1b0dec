/** Pure view models and HTML rendering for variant cards and the
 * comparison table. Every displayed number is copied from a service
 * response field; the only local work is formatting and ranking. */

import { ClassScheme, PredictResponse } from "./api.js";
import { DraftVariant } from "./state.js";

export const DEFAULT_SCHEME: ClassScheme = { boundaries: [20, 100], labels: ["A", "B", "C"] };

export interface FeatureRow {
  name: string;
  value: number;
  provenance: string;
}

export interface CardView {
  label: string;
  status: DraftVariant["status"];
  request: DraftVariant["request"];
  predictedClass?: string;
  classRange?: string;
  estimate?: number;
  zeroProbability?: number;
  distribution?: { label: string; share: number }[];
  features?: FeatureRow[];
  fingerprint?: string;
  error?: string;
  canRetry: boolean;
}

const PROVENANCE: Record<string, string> = {
  S: "source score table",
  C: "category score table",
  Subj: "subjectivity classifier",
  Ent_ct: "gazetteer match count",
  Ent_max: "entity score table",
  Ent_avg: "entity score table",
};

export const FEATURE_NAMES = ["S", "C", "Subj", "Ent_ct", "Ent_max", "Ent_avg"] as const;

function formatBoundary(value: number): string {
  return Number.isInteger(value) ? String(value) : String(value);
}

/** Human form of a half-open class interval, e.g. B of [20,100) -> "20-99". */
export function classRange(label: string, scheme: ClassScheme): string {
  const index = scheme.labels.indexOf(label);
  if (index < 0) return "";
  const lo = index === 0 ? 1 : scheme.boundaries[index - 1]!;
  if (index === scheme.boundaries.length) return `${formatBoundary(lo)}+ tweets`;
  const hi = scheme.boundaries[index]!;
  return `${formatBoundary(lo)}-${formatBoundary(hi - 1)} tweets`;
}

export function featureRows(response: PredictResponse): FeatureRow[] {
  return FEATURE_NAMES.map((name) => ({
    name,
    value: response.features[name],
    provenance: PROVENANCE[name]!,
  }));
}

export function cardView(variant: DraftVariant, scheme: ClassScheme = DEFAULT_SCHEME): CardView {
  const base: CardView = {
    label: variant.label,
    status: variant.status,
    request: variant.request,
    canRetry: variant.status === "error",
  };
  if (variant.status === "error") {
    return { ...base, error: variant.error ?? "request failed" };
  }
  if (variant.status !== "ok" || !variant.response) return base;
  const response = variant.response;
  return {
    ...base,
    predictedClass: response.predicted_class,
    classRange: classRange(response.predicted_class, scheme),
    estimate: response.regression_estimate,
    zeroProbability: response.zero_tweet_probability,
    distribution: Object.keys(response.class_distribution)
      .sort()
      .map((label) => ({ label, share: response.class_distribution[label]! })),
    features: featureRows(response),
    fingerprint: response.model_fingerprint,
  };
}

export interface ComparisonCell {
  value: number | string;
  isMax: boolean;
}

export interface ComparisonRow {
  label: string;
  cells: Record<string, ComparisonCell>;
}

export interface ComparisonView {
  columns: string[];
  rows: ComparisonRow[];
  excluded: { label: string; status: string }[];
}

export const COMPARISON_COLUMNS = ["class", "estimate", ...FEATURE_NAMES] as const;

/** Scored variants as a table sorted by estimate (descending, ties by
 * label), numeric column maxima flagged, unscored variants listed out. */
export function comparisonView(variants: DraftVariant[]): ComparisonView {
  const scored = variants.filter(
    (v): v is DraftVariant & { response: PredictResponse } =>
      v.status === "ok" && v.response !== undefined,
  );
  const excluded = variants
    .filter((v) => v.status !== "ok" || v.response === undefined)
    .map((v) => ({ label: v.label, status: v.status }));

  scored.sort((a, b) => {
    const diff = b.response.regression_estimate - a.response.regression_estimate;
    if (diff !== 0) return diff;
    return a.label < b.label ? -1 : a.label > b.label ? 1 : 0;
  });

  const numericValue = (v: PredictResponse, column: string): number =>
    column === "estimate"
      ? v.regression_estimate
      : v.features[column as (typeof FEATURE_NAMES)[number]];

  const maxima = new Map<string, number>();
  for (const column of COMPARISON_COLUMNS) {
    if (column === "class") continue;
    maxima.set(column, Math.max(...scored.map((v) => numericValue(v.response, column))));
  }

  const rows: ComparisonRow[] = scored.map((variant) => {
    const cells: Record<string, ComparisonCell> = {
      class: { value: variant.response.predicted_class, isMax: false },
    };
    for (const column of COMPARISON_COLUMNS) {
      if (column === "class") continue;
      const value = numericValue(variant.response, column);
      cells[column] = { value, isMax: scored.length > 1 && value === maxima.get(column) };
    }
    return { label: variant.label, cells };
  });

  return { columns: [...COMPARISON_COLUMNS], rows, excluded };
}

// ---------------------------------------------------------------- HTML

const escapeHtml = (raw: string): string =>
  raw.replace(/[&<>"']/g, (ch) => `&#${ch.charCodeAt(0)};`);

export function formatNumber(value: number): string {
  if (Number.isInteger(value)) return String(value);
  return value >= 100 ? value.toFixed(1) : value.toFixed(3);
}

export function renderCard(view: CardView): string {
  const head = `<header><strong>${escapeHtml(view.label)}</strong>` +
    `<span class="status status-${view.status}">${view.status}</span></header>`;
  if (view.status === "error") {
    return (
      `<article class="card error" data-label="${escapeHtml(view.label)}">${head}` +
      `<p class="error-message">${escapeHtml(view.error ?? "request failed")}</p>` +
      `<button class="retry" data-label="${escapeHtml(view.label)}">retry</button>` +
      `</article>`
    );
  }
  if (view.status !== "ok") {
    return (
      `<article class="card ${view.status}" data-label="${escapeHtml(view.label)}">${head}` +
      `<p>${view.status === "pending" ? "scoring&hellip;" : "not scored yet"}</p></article>`
    );
  }
  const features = (view.features ?? [])
    .map(
      (row) =>
        `<tr><td>${row.name}</td><td class="num">${formatNumber(row.value)}</td>` +
        `<td class="prov">${escapeHtml(row.provenance)}</td></tr>`,
    )
    .join("");
  const distribution = (view.distribution ?? [])
    .map((d) => `${d.label} ${(d.share * 100).toFixed(1)}%`)
    .join(", ");
  return (
    `<article class="card ok" data-label="${escapeHtml(view.label)}">${head}` +
    `<p class="verdict">class <strong>${escapeHtml(view.predictedClass ?? "")}</strong>` +
    ` (${escapeHtml(view.classRange ?? "")})` +
    ` &middot; estimate <strong>${formatNumber(view.estimate ?? 0)}</strong> tweets` +
    ` &middot; P(zero) ${formatNumber(view.zeroProbability ?? 0)}</p>` +
    `<p class="distribution">${escapeHtml(distribution)}</p>` +
    `<table class="features"><thead><tr><th>feature</th><th>value</th><th>from</th></tr></thead>` +
    `<tbody>${features}</tbody></table>` +
    `<footer class="fingerprint">model ${escapeHtml(view.fingerprint ?? "")}</footer></article>`
  );
}

export function renderComparison(view: ComparisonView): string {
  if (view.rows.length < 2) {
    return `<p class="comparison-hint">score at least two variants to compare</p>`;
  }
  const header = view.columns.map((c) => `<th>${escapeHtml(c)}</th>`).join("");
  const body = view.rows
    .map((row) => {
      const cells = view.columns
        .map((column) => {
          const cell = row.cells[column]!;
          const value =
            typeof cell.value === "number" ? formatNumber(cell.value) : String(cell.value);
          return `<td class="${cell.isMax ? "max" : ""}">${escapeHtml(value)}</td>`;
        })
        .join("");
      return `<tr><th>${escapeHtml(row.label)}</th>${cells}</tr>`;
    })
    .join("");
  const excluded = view.excluded.length
    ? `<p class="excluded">not compared (unscored): ` +
      view.excluded.map((e) => `${escapeHtml(e.label)} [${e.status}]`).join(", ") +
      `</p>`
    : "";
  return (
    `<table class="comparison"><thead><tr><th>variant</th>${header}</tr></thead>` +
    `<tbody>${body}</tbody></table>${excluded}`
  );
}
