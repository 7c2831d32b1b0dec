/** Draft-variant state over the service contract.
 *
 * Each variant is a named draft with the latest response (or a
 * pending/error state). Scorings may overlap; every request gets an id
 * and a variant only accepts the response matching its newest request,
 * so stale responses are discarded silently.
 */

import { Api, PredictRequest, PredictResponse, ServiceError } from "./api.js";

export type VariantStatus = "unscored" | "pending" | "ok" | "error";

export interface DraftVariant {
  label: string;
  request: PredictRequest;
  status: VariantStatus;
  response?: PredictResponse;
  error?: string;
}

interface Internal extends DraftVariant {
  latestRequestId: number;
}

export type Listener = (variants: DraftVariant[]) => void;

export class WhatIfStore {
  private variants = new Map<string, Internal>();
  private order: string[] = [];
  private seq = 0;
  private listeners: Listener[] = [];

  constructor(private api: Api) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    const snapshot = this.list();
    for (const listener of this.listeners) listener(snapshot);
  }

  list(): DraftVariant[] {
    return this.order.map((label) => {
      const { latestRequestId: _omit, ...pub } = this.variants.get(label)!;
      return pub;
    });
  }

  get(label: string): DraftVariant | undefined {
    const v = this.variants.get(label);
    if (!v) return undefined;
    const { latestRequestId: _omit, ...pub } = v;
    return pub;
  }

  addVariant(label: string, request: PredictRequest): DraftVariant {
    if (!label.trim()) throw new Error("variant label must be non-empty");
    if (this.variants.has(label)) {
      throw new Error(`variant label ${JSON.stringify(label)} already in use`);
    }
    const variant: Internal = {
      label,
      request: { ...request },
      status: "unscored",
      latestRequestId: 0,
    };
    this.variants.set(label, variant);
    this.order.push(label);
    this.emit();
    return this.get(label)!;
  }

  removeVariant(label: string): void {
    this.variants.delete(label);
    this.order = this.order.filter((l) => l !== label);
    this.emit();
  }

  /** Edit the draft text; entered fields survive errors and rescoring. */
  updateRequest(label: string, patch: Partial<PredictRequest>): void {
    const variant = this.require(label);
    variant.request = { ...variant.request, ...patch };
    this.emit();
  }

  /** POST the draft; the newest in-flight request wins the variant. */
  async scoreDraft(label: string): Promise<DraftVariant> {
    const variant = this.require(label);
    const requestId = ++this.seq;
    variant.latestRequestId = requestId;
    variant.status = "pending";
    this.emit();
    try {
      const response = await this.api.predict({ ...variant.request });
      if (this.variants.get(label)?.latestRequestId !== requestId) {
        return this.get(label)!; // stale: a newer scoring owns this variant
      }
      variant.status = "ok";
      variant.response = response;
      variant.error = undefined;
    } catch (err) {
      if (this.variants.get(label)?.latestRequestId !== requestId) {
        return this.get(label)!;
      }
      variant.status = "error";
      variant.error =
        err instanceof ServiceError
          ? `${err.detail.message}${err.detail.field ? ` (${err.detail.field})` : ""}`
          : err instanceof Error
            ? err.message
            : String(err);
    }
    this.emit();
    return this.get(label)!;
  }

  async scoreAll(): Promise<void> {
    await Promise.all(this.order.map((label) => this.scoreDraft(label)));
  }

  private require(label: string): Internal {
    const variant = this.variants.get(label);
    if (!variant) throw new Error(`no variant ${JSON.stringify(label)}`);
    return variant;
  }
}
