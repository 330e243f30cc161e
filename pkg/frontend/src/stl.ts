/** Minimal STL reader for meshes streamed from the service. Produces a
 * flat, non-indexed triangle soup suitable for a BufferGeometry. */

export interface TriangleSoup {
  /** 9 floats per facet: v0 v1 v2. */
  positions: Float32Array;
  facetCount: number;
}

function isAscii(bytes: Uint8Array): boolean {
  const head = new TextDecoder().decode(bytes.slice(0, 5));
  if (head !== "solid") return false;
  // a binary file can also start with "solid": trust the facet count math
  if (bytes.length >= 84) {
    const count = new DataView(bytes.buffer, bytes.byteOffset + 80, 4).getUint32(
      0,
      true,
    );
    if (84 + 50 * count === bytes.length) return false;
  }
  return true;
}

function parseBinary(bytes: Uint8Array): TriangleSoup {
  if (bytes.length < 84) throw new Error("truncated binary STL header");
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const count = view.getUint32(80, true);
  if (bytes.length < 84 + 50 * count) throw new Error("truncated binary STL body");
  const positions = new Float32Array(count * 9);
  for (let f = 0; f < count; f++) {
    const base = 84 + 50 * f + 12; // skip the normal
    for (let k = 0; k < 9; k++) {
      positions[f * 9 + k] = view.getFloat32(base + 4 * k, true);
    }
  }
  return { positions, facetCount: count };
}

function parseAscii(text: string): TriangleSoup {
  const values: number[] = [];
  const re = /vertex\s+(\S+)\s+(\S+)\s+(\S+)/g;
  let m: RegExpExecArray | null;
  while ((m = re.exec(text)) !== null) {
    values.push(Number(m[1]), Number(m[2]), Number(m[3]));
  }
  if (values.length === 0 || values.length % 9 !== 0) {
    throw new Error("malformed ASCII STL");
  }
  return {
    positions: new Float32Array(values),
    facetCount: values.length / 9,
  };
}

export function parseStl(buffer: ArrayBuffer): TriangleSoup {
  const bytes = new Uint8Array(buffer);
  return isAscii(bytes)
    ? parseAscii(new TextDecoder().decode(bytes))
    : parseBinary(bytes);
}
