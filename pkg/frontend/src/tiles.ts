/** Non-overlapped tile planning with edge replication, matching the engine. */

export interface TileSpec {
  x0: number
  y0: number
  size: number
  padRight: number
  padBottom: number
}

export interface Raster {
  /** row-major (height, width, channels), values in [0, 1] */
  data: Float32Array
  height: number
  width: number
  channels: number
}

export function planTiles(
  height: number,
  width: number,
  tileSize: number,
): TileSpec[] {
  if (tileSize < 64) {
    throw new Error(`tile size must be >= 64, got ${tileSize}`)
  }
  if (height < 1 || width < 1) {
    throw new Error('image dimensions must be positive')
  }
  const rows = Math.ceil(height / tileSize)
  const cols = Math.ceil(width / tileSize)
  const tiles: TileSpec[] = []
  for (let r = 0; r < rows; r++) {
    const y0 = r * tileSize
    const padBottom = Math.max(0, y0 + tileSize - height)
    for (let c = 0; c < cols; c++) {
      const x0 = c * tileSize
      const padRight = Math.max(0, x0 + tileSize - width)
      tiles.push({ x0, y0, size: tileSize, padRight, padBottom })
    }
  }
  return tiles
}

/** Crop one tile, replicating the last real row/column into the padding. */
export function extractTile(raster: Raster, spec: TileSpec): Raster {
  const { size, channels } = { size: spec.size, channels: raster.channels }
  const out = new Float32Array(size * size * channels)
  for (let y = 0; y < size; y++) {
    const sy = Math.min(spec.y0 + y, raster.height - 1)
    for (let x = 0; x < size; x++) {
      const sx = Math.min(spec.x0 + x, raster.width - 1)
      const src = (sy * raster.width + sx) * channels
      const dst = (y * size + x) * channels
      for (let c = 0; c < channels; c++) {
        out[dst + c] = raster.data[src + c]
      }
    }
  }
  return { data: out, height: size, width: size, channels }
}
