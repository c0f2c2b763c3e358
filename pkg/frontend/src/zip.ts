// Minimal reader for the service's export archive. The service writes
// stored (uncompressed) entries, so scanning local file headers is enough.

export interface ZipEntry {
  name: string;
  data: Uint8Array;
}

const LOCAL_HEADER = 0x04034b50;

export function readStoredZip(buf: ArrayBuffer): ZipEntry[] {
  const view = new DataView(buf);
  const bytes = new Uint8Array(buf);
  const entries: ZipEntry[] = [];
  let off = 0;
  while (off + 30 <= bytes.length) {
    if (view.getUint32(off, true) !== LOCAL_HEADER) break; // central directory
    const method = view.getUint16(off + 8, true);
    const size = view.getUint32(off + 18, true);
    const nameLen = view.getUint16(off + 26, true);
    const extraLen = view.getUint16(off + 28, true);
    const name = new TextDecoder().decode(bytes.subarray(off + 30, off + 30 + nameLen));
    if (method !== 0) {
      throw new Error(`zip entry ${name} uses compression method ${method}; expected stored`);
    }
    const start = off + 30 + nameLen + extraLen;
    entries.push({ name, data: bytes.slice(start, start + size) });
    off = start + size;
  }
  return entries;
}

export function zipEntryText(entries: ZipEntry[], name: string): string {
  const entry = entries.find((e) => e.name === name);
  if (!entry) {
    throw new Error(`zip has no entry ${name}; got ${entries.map((e) => e.name).join(", ")}`);
  }
  return new TextDecoder().decode(entry.data);
}
