/**
 * Minimal PNG decoder for the mask wire format: non-interlaced grayscale,
 * bit depth 8 or 16. Decoding happens here rather than through a canvas
 * because canvases quantize 16-bit grayscale to 8 bits, which destroys
 * small object IDs; the overlay math needs the exact label values.
 */

const PNG_SIGNATURE = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

export interface LabelImage {
  width: number;
  height: number;
  /** Row-major label values, one per pixel. */
  labels: Uint16Array;
}

async function inflate(data: Uint8Array): Promise<Uint8Array> {
  // IDAT payload is zlib-wrapped deflate (RFC 1950).
  const stream = new Blob([data as BlobPart])
    .stream()
    .pipeThrough(new DecompressionStream("deflate"));
  const out = new Uint8Array(await new Response(stream).arrayBuffer());
  return out;
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

function unfilter(
  raw: Uint8Array,
  width: number,
  height: number,
  bytesPerPixel: number,
): Uint8Array {
  const stride = width * bytesPerPixel;
  const out = new Uint8Array(stride * height);
  let pos = 0;
  for (let row = 0; row < height; row++) {
    const filter = raw[pos++];
    const line = out.subarray(row * stride, (row + 1) * stride);
    const prev = row > 0
      ? out.subarray((row - 1) * stride, row * stride)
      : null;
    for (let i = 0; i < stride; i++) {
      const x = raw[pos + i];
      const left = i >= bytesPerPixel ? line[i - bytesPerPixel] : 0;
      const up = prev ? prev[i] : 0;
      const upLeft = prev && i >= bytesPerPixel ? prev[i - bytesPerPixel] : 0;
      let value: number;
      switch (filter) {
        case 0: value = x; break;
        case 1: value = x + left; break;
        case 2: value = x + up; break;
        case 3: value = x + ((left + up) >> 1); break;
        case 4: value = x + paeth(left, up, upLeft); break;
        default:
          throw new Error(`png: unknown filter type ${filter} in row ${row}`);
      }
      line[i] = value & 0xff;
    }
    pos += stride;
  }
  return out;
}

/** Decode a grayscale PNG into exact per-pixel label values. */
export async function decodeGrayPng(buffer: ArrayBuffer): Promise<LabelImage> {
  const bytes = new Uint8Array(buffer);
  for (let i = 0; i < PNG_SIGNATURE.length; i++) {
    if (bytes[i] !== PNG_SIGNATURE[i]) {
      throw new Error("png: bad signature");
    }
  }
  const view = new DataView(buffer);
  let offset = 8;
  let width = 0;
  let height = 0;
  let bitDepth = 0;
  const idat: Uint8Array[] = [];
  while (offset < bytes.length) {
    const length = view.getUint32(offset);
    const type = String.fromCharCode(
      bytes[offset + 4], bytes[offset + 5], bytes[offset + 6], bytes[offset + 7]);
    const body = bytes.subarray(offset + 8, offset + 8 + length);
    if (type === "IHDR") {
      width = view.getUint32(offset + 8);
      height = view.getUint32(offset + 12);
      bitDepth = bytes[offset + 16];
      const colorType = bytes[offset + 17];
      const interlace = bytes[offset + 20];
      if (colorType !== 0) {
        throw new Error(`png: expected grayscale, got color type ${colorType}`);
      }
      if (bitDepth !== 8 && bitDepth !== 16) {
        throw new Error(`png: unsupported bit depth ${bitDepth}`);
      }
      if (interlace !== 0) {
        throw new Error("png: interlaced images not supported");
      }
    } else if (type === "IDAT") {
      idat.push(body);
    } else if (type === "IEND") {
      break;
    }
    offset += 12 + length; // length + type + body + crc
  }
  if (width === 0 || height === 0 || idat.length === 0) {
    throw new Error("png: missing IHDR or IDAT");
  }
  const compressed = new Uint8Array(idat.reduce((n, c) => n + c.length, 0));
  let at = 0;
  for (const chunk of idat) {
    compressed.set(chunk, at);
    at += chunk.length;
  }
  const bytesPerPixel = bitDepth === 16 ? 2 : 1;
  const raw = await inflate(compressed);
  const expected = height * (1 + width * bytesPerPixel);
  if (raw.length < expected) {
    throw new Error(`png: short pixel data (${raw.length}/${expected})`);
  }
  const data = unfilter(raw, width, height, bytesPerPixel);
  const labels = new Uint16Array(width * height);
  if (bitDepth === 16) {
    for (let i = 0; i < labels.length; i++) {
      labels[i] = (data[2 * i] << 8) | data[2 * i + 1]; // network byte order
    }
  } else {
    labels.set(data);
  }
  return { width, height, labels };
}
