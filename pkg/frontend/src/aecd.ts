/**
 * Binary embedding cache (.aecd), little-endian:
 *   magic 'AECD' | version u16 = 1 | dtype u8 = 0 (f32) | stride u16
 *   | D u32 | h u32 | w u32 | payload D*h*w f32 (row-major cells, D
 *   contiguous per cell) | CRC32 of payload u32
 */

import { crc32 } from 'node:zlib'

export const MAGIC = 'AECD'
export const VERSION = 1
export const DTYPE_F32 = 0
export const HEADER_SIZE = 21

export interface EmbeddingGrid {
  /** row-major (h, w, dim) features, dim contiguous per cell */
  data: Float32Array
  h: number
  w: number
  dim: number
  /** pixels per grid cell along each axis */
  stride: number
}

export function encodeAecd(grid: EmbeddingGrid): Buffer {
  const { data, h, w, dim, stride } = grid
  if (data.length !== h * w * dim) {
    throw new Error(
      `payload length ${data.length} does not match ${h}x${w}x${dim}`,
    )
  }
  const payload = Buffer.alloc(data.length * 4)
  for (let i = 0; i < data.length; i++) {
    payload.writeFloatLE(data[i], i * 4)
  }
  const header = Buffer.alloc(HEADER_SIZE)
  header.write(MAGIC, 0, 'ascii')
  header.writeUInt16LE(VERSION, 4)
  header.writeUInt8(DTYPE_F32, 6)
  header.writeUInt16LE(stride, 7)
  header.writeUInt32LE(dim, 9)
  header.writeUInt32LE(h, 13)
  header.writeUInt32LE(w, 17)
  const trailer = Buffer.alloc(4)
  trailer.writeUInt32LE(crc32(payload) >>> 0, 0)
  return Buffer.concat([header, payload, trailer])
}

export function decodeAecd(raw: Buffer): EmbeddingGrid {
  if (raw.length < HEADER_SIZE + 4) {
    throw new Error('truncated cache buffer')
  }
  if (raw.toString('ascii', 0, 4) !== MAGIC) {
    throw new Error('bad magic')
  }
  const version = raw.readUInt16LE(4)
  if (version !== VERSION) {
    throw new Error(`unsupported cache version ${version}`)
  }
  const dtype = raw.readUInt8(6)
  if (dtype !== DTYPE_F32) {
    throw new Error(`unsupported cache dtype ${dtype}`)
  }
  const stride = raw.readUInt16LE(7)
  const dim = raw.readUInt32LE(9)
  const h = raw.readUInt32LE(13)
  const w = raw.readUInt32LE(17)
  const n = dim * h * w * 4
  if (raw.length !== HEADER_SIZE + n + 4) {
    throw new Error('truncated cache buffer')
  }
  const payload = raw.subarray(HEADER_SIZE, HEADER_SIZE + n)
  const crc = raw.readUInt32LE(HEADER_SIZE + n)
  if ((crc32(payload) >>> 0) !== crc) {
    throw new Error('checksum mismatch')
  }
  const data = new Float32Array(h * w * dim)
  for (let i = 0; i < data.length; i++) {
    data[i] = payload.readFloatLE(i * 4)
  }
  return { data, h, w, dim, stride }
}

export function cacheFilename(
  timestamp: string,
  tileX0: number,
  tileY0: number,
): string {
  return `${timestamp}_${tileX0}_${tileY0}.aecd`
}
