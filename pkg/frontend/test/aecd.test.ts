import { describe, expect, it } from 'vitest'
import {
  HEADER_SIZE,
  cacheFilename,
  decodeAecd,
  encodeAecd,
  EmbeddingGrid,
} from '../src/aecd'

function sampleGrid(h = 2, w = 3, dim = 4, stride = 16): EmbeddingGrid {
  const data = new Float32Array(h * w * dim)
  for (let i = 0; i < data.length; i++) data[i] = Math.fround(Math.sin(i))
  return { data, h, w, dim, stride }
}

describe('aecd format', () => {
  it('round trips', () => {
    const grid = sampleGrid()
    const back = decodeAecd(encodeAecd(grid))
    expect(back.h).toBe(grid.h)
    expect(back.w).toBe(grid.w)
    expect(back.dim).toBe(grid.dim)
    expect(back.stride).toBe(grid.stride)
    expect(Array.from(back.data)).toEqual(Array.from(grid.data))
  })

  it('lays out the header fields little-endian', () => {
    const buf = encodeAecd(sampleGrid(2, 3, 4, 16))
    expect(buf.toString('ascii', 0, 4)).toBe('AECD')
    expect(buf.readUInt16LE(4)).toBe(1) // version
    expect(buf.readUInt8(6)).toBe(0) // dtype f32
    expect(buf.readUInt16LE(7)).toBe(16) // stride
    expect(buf.readUInt32LE(9)).toBe(4) // D
    expect(buf.readUInt32LE(13)).toBe(2) // h
    expect(buf.readUInt32LE(17)).toBe(3) // w
    expect(buf.length).toBe(HEADER_SIZE + 2 * 3 * 4 * 4 + 4)
  })

  it('is deterministic', () => {
    expect(encodeAecd(sampleGrid()).equals(encodeAecd(sampleGrid()))).toBe(true)
  })

  it('rejects a corrupted payload', () => {
    const buf = encodeAecd(sampleGrid())
    buf[HEADER_SIZE + 1] ^= 0xff
    expect(() => decodeAecd(buf)).toThrow(/checksum mismatch/)
  })

  it('rejects bad magic', () => {
    const buf = encodeAecd(sampleGrid())
    buf.write('NOPE', 0, 'ascii')
    expect(() => decodeAecd(buf)).toThrow(/bad magic/)
  })

  it('rejects truncation', () => {
    const buf = encodeAecd(sampleGrid())
    expect(() => decodeAecd(buf.subarray(0, buf.length - 3))).toThrow(
      /truncated/,
    )
    expect(() => decodeAecd(buf.subarray(0, 10))).toThrow(/truncated/)
  })

  it('rejects mismatched payload length at encode time', () => {
    const grid = sampleGrid()
    expect(() =>
      encodeAecd({ ...grid, data: grid.data.subarray(1) }),
    ).toThrow(/does not match/)
  })

  it('names cache files timestamp_x0_y0', () => {
    expect(cacheFilename('2021-03-01', 2048, 4096)).toBe(
      '2021-03-01_2048_4096.aecd',
    )
  })
})
