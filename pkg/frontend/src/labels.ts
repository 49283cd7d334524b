/**
 * Label sidecar format: one JSON object per line, {"id": str, "label": [..]}.
 */

export interface LabelRecord {
  id: string;
  label: Float64Array;
}

export class LabelParseError extends Error {}

export function parseLabelsJsonl(text: string): LabelRecord[] {
  const records: LabelRecord[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "") continue;
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch (err) {
      throw new LabelParseError(`line ${i + 1}: ${(err as Error).message}`);
    }
    const rec = obj as { id?: unknown; label?: unknown };
    if (typeof rec.id !== "string" || !Array.isArray(rec.label)) {
      throw new LabelParseError(`line ${i + 1}: expected {"id", "label"}`);
    }
    records.push({ id: rec.id, label: Float64Array.from(rec.label as number[]) });
  }
  return records;
}

export function dumpLabelsJsonl(records: LabelRecord[]): string {
  return records
    .map((r) => JSON.stringify({ id: r.id, label: Array.from(r.label) }) + "\n")
    .join("");
}
