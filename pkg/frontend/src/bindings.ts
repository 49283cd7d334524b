/**
 * Typed bindings over the augment CLI.
 *
 * Inputs are serialized to VCT containers plus a JSON-lines label sidecar in
 * a scratch directory, the CLI runs once, and the artifacts it writes are
 * read back verbatim. Determinism therefore matches the command line exactly
 * for a given (seed, epoch, batchIndex, sample) address.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { runCli, withTempDir } from "./bridge.js";
import { dumpLabelsJsonl, parseLabelsJsonl } from "./labels.js";
import { Clip, makeClip, readVct, writeVct } from "./vct.js";

export interface LabeledClip {
  id: string;
  clip: Clip;
  label: Float64Array;
}

export interface BatchOptions {
  variant: "spatial" | "temporal" | "st" | "perframe";
  alpha: number;
  prob: number;
  nVideos: number;
  seed: number;
  epoch?: number;
  batchIndex?: number;
}

export interface BatchResult {
  items: LabeledClip[];
  /** Whether the coin flip applied mixing to this batch. */
  applied: boolean;
  /** Raw labels.jsonl artifact, byte for byte. */
  labelsJsonl: string;
  /** Raw recipes.json artifact, byte for byte. */
  recipesJson: string;
}

export interface FeatureSeq {
  /** Number of segments (rows). */
  s: number;
  /** Feature dimension (columns). */
  d: number;
  /** Row-major S x D values. */
  data: Float32Array;
  label: Float64Array;
}

export interface FeatmixResult extends FeatureSeq {
  keepFraction: number;
}

export interface RngAddress {
  seed: number;
  epoch?: number;
  batchIndex?: number;
  sample?: number;
}

/** Mix a whole batch of labeled clips through the CLI's batch mode. */
export function bound_videomix_batch(
  items: LabeledClip[],
  opts: BatchOptions,
): BatchResult {
  return withTempDir((dir) => {
    const paths: string[] = [];
    for (const item of items) {
      const p = join(dir, `${item.id}.vct`);
      writeFileSync(p, writeVct(item.clip));
      paths.push(p);
    }
    const labelsPath = join(dir, "labels.jsonl");
    writeFileSync(labelsPath, dumpLabelsJsonl(items));
    const outDir = join(dir, "out");
    const stdout = runCli([
      "augment",
      "--inputs", ...paths,
      "--labels", labelsPath,
      "--variant", opts.variant,
      "--alpha", String(opts.alpha),
      "--prob", String(opts.prob),
      "--n-videos", String(opts.nVideos),
      "--seed", String(opts.seed),
      "--epoch", String(opts.epoch ?? 0),
      "--batch-index", String(opts.batchIndex ?? 0),
      "--out-dir", outDir,
    ]);
    const report = JSON.parse(stdout) as { applied: boolean };
    const labelsJsonl = readFileSync(join(outDir, "labels.jsonl"), "utf8");
    const recipesJson = readFileSync(join(outDir, "recipes.json"), "utf8");
    const labelById = new Map(
      parseLabelsJsonl(labelsJsonl).map((r) => [r.id, r.label]),
    );
    const mixed = items.map((item) => {
      const bytes = readFileSync(join(outDir, `${item.id}.vct`));
      const label = labelById.get(item.id);
      if (label === undefined) {
        throw new Error(`labels.jsonl is missing id ${item.id}`);
      }
      return {
        id: item.id,
        clip: readVct(new Uint8Array(bytes)),
        label,
      };
    });
    return { items: mixed, applied: report.applied, labelsJsonl, recipesJson };
  });
}

/** Mix two feature sequences through the CLI's temporal pair mode. */
export function bound_temporal_featmix(
  a: FeatureSeq,
  b: FeatureSeq,
  alpha: number,
  path: RngAddress,
): FeatmixResult {
  return withTempDir((dir) => {
    // An S x D feature matrix travels as an (S,1,1,D) clip; the temporal
    // cuboid over that shape is exactly a contiguous run of rows.
    const aPath = join(dir, "a.vct");
    const bPath = join(dir, "b.vct");
    writeFileSync(aPath, writeVct(makeClip(a.s, 1, 1, a.d, a.data)));
    writeFileSync(bPath, writeVct(makeClip(b.s, 1, 1, b.d, b.data)));
    const labelsPath = join(dir, "labels.jsonl");
    writeFileSync(labelsPath, dumpLabelsJsonl([
      { id: "a", label: a.label },
      { id: "b", label: b.label },
    ]));
    const outPath = join(dir, "mixed.vct");
    const stdout = runCli([
      "augment",
      "--a", aPath,
      "--b", bPath,
      "--labels", labelsPath,
      "--variant", "temporal",
      "--alpha", String(alpha),
      "--seed", String(path.seed),
      "--epoch", String(path.epoch ?? 0),
      "--batch-index", String(path.batchIndex ?? 0),
      "--sample", String(path.sample ?? 0),
      "--out", outPath,
    ]);
    const report = JSON.parse(stdout) as { keep_fraction: number };
    const clip = readVct(new Uint8Array(readFileSync(outPath)));
    const labelText = readFileSync(join(dir, "mixed.label.jsonl"), "utf8");
    const label = parseLabelsJsonl(labelText)[0].label;
    return {
      s: clip.t,
      d: clip.c,
      data: clip.data,
      label,
      keepFraction: report.keep_fraction,
    };
  });
}
