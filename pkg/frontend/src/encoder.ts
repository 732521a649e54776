/**
 * Image encoders producing a dense feature grid for one tile.
 *
 * Two implementations: a deterministic patch-statistics encoder that needs no
 * weights (used in tests and as the default), and a TensorFlow.js graph-model
 * encoder for real foundation-model features. Tiles larger than a model's
 * native input are bilinearly resized down to it before encoding, and the
 * recorded stride grows accordingly so h * stride always equals the tile size.
 */

import { existsSync } from 'node:fs'
import { join } from 'node:path'
import { EmbeddingGrid } from './aecd'
import { Raster } from './tiles'

export interface Encoder {
  name: string
  encode(tile: Raster): Promise<EmbeddingGrid>
}

/**
 * Deterministic stand-in encoder: per cell, the per-channel mean and standard
 * deviation plus the luminance range over a fixed 16px footprint.
 */
export function patchStatsEncoder(stride = 16): Encoder {
  return {
    name: 'patch-stats',
    async encode(tile: Raster): Promise<EmbeddingGrid> {
      const { height, width, channels } = tile
      if (height % stride !== 0 || width % stride !== 0) {
        throw new Error(
          `tile dims ${height}x${width} not divisible by stride ${stride}`,
        )
      }
      const h = height / stride
      const w = width / stride
      const dim = 2 * channels + 2
      const data = new Float32Array(h * w * dim)
      for (let cy = 0; cy < h; cy++) {
        for (let cx = 0; cx < w; cx++) {
          const sums = new Float64Array(channels)
          const sq = new Float64Array(channels)
          let lumMin = Infinity
          let lumMax = -Infinity
          for (let y = cy * stride; y < (cy + 1) * stride; y++) {
            for (let x = cx * stride; x < (cx + 1) * stride; x++) {
              const px = (y * width + x) * channels
              let lum = 0
              for (let c = 0; c < channels; c++) {
                const v = tile.data[px + c]
                sums[c] += v
                sq[c] += v * v
                lum += v
              }
              lum /= channels
              if (lum < lumMin) lumMin = lum
              if (lum > lumMax) lumMax = lum
            }
          }
          const area = stride * stride
          const out = (cy * w + cx) * dim
          for (let c = 0; c < channels; c++) {
            const mean = sums[c] / area
            data[out + c] = mean
            data[out + channels + c] = Math.sqrt(
              Math.max(0, sq[c] / area - mean * mean),
            )
          }
          data[out + 2 * channels] = lumMin
          data[out + 2 * channels + 1] = lumMax
        }
      }
      return { data, h, w, dim, stride }
    },
  }
}

/** Bilinear resize to a square native resolution. */
export function resizeRaster(raster: Raster, target: number): Raster {
  if (raster.height === target && raster.width === target) return raster
  const { channels } = raster
  const out = new Float32Array(target * target * channels)
  for (let y = 0; y < target; y++) {
    const fy = ((y + 0.5) * raster.height) / target - 0.5
    const y0 = Math.max(0, Math.floor(fy))
    const y1 = Math.min(raster.height - 1, y0 + 1)
    const wy = fy - y0
    for (let x = 0; x < target; x++) {
      const fx = ((x + 0.5) * raster.width) / target - 0.5
      const x0 = Math.max(0, Math.floor(fx))
      const x1 = Math.min(raster.width - 1, x0 + 1)
      const wx = fx - x0
      for (let c = 0; c < channels; c++) {
        const at = (yy: number, xx: number) =>
          raster.data[(yy * raster.width + xx) * channels + c]
        const top = at(y0, x0) * (1 - wx) + at(y0, x1) * wx
        const bot = at(y1, x0) * (1 - wx) + at(y1, x1) * wx
        out[(y * target + x) * channels + c] = top * (1 - wy) + bot * wy
      }
    }
  }
  return { data: out, height: target, width: target, channels }
}

export interface GraphModelEncoderOptions {
  /** directory containing model.json + weight shards */
  modelDir: string
  /** square input resolution the model expects */
  nativeSize: number
}

/**
 * TensorFlow.js graph-model encoder. The model must map a
 * [1, nativeSize, nativeSize, 3] image to a [1, g, g, D] feature grid.
 */
export function graphModelEncoder(opts: GraphModelEncoderOptions): Encoder {
  if (!existsSync(join(opts.modelDir, 'model.json'))) {
    throw new Error(`missing encoder weights: no model.json in ${opts.modelDir}`)
  }
  let modelPromise: Promise<any> | undefined
  return {
    name: `graph-model:${opts.modelDir}`,
    async encode(tile: Raster): Promise<EmbeddingGrid> {
      const tf = require('@tensorflow/tfjs')
      if (!modelPromise) {
        modelPromise = tf.loadGraphModel(fileIOHandler(tf, opts.modelDir))
      }
      const model = await modelPromise
      const resized = resizeRaster(tile, opts.nativeSize)
      const input = tf.tensor4d(resized.data, [
        1,
        opts.nativeSize,
        opts.nativeSize,
        resized.channels,
      ])
      const output = model.predict(input)
      const [, h, w, dim] = output.shape
      if (tile.height % h !== 0 || tile.width % w !== 0) {
        throw new Error(
          `feature grid ${h}x${w} does not divide tile ${tile.height}x${tile.width}`,
        )
      }
      const data = new Float32Array(await output.data())
      input.dispose()
      output.dispose()
      return { data, h, w, dim, stride: tile.height / h }
    },
  }
}

/** Minimal read-only IOHandler so graph models load from the filesystem. */
function fileIOHandler(tf: any, modelDir: string) {
  return {
    async load() {
      const { readFileSync } = require('node:fs')
      const modelJson = JSON.parse(
        readFileSync(join(modelDir, 'model.json'), 'utf8'),
      )
      const buffers: Buffer[] = []
      for (const group of modelJson.weightsManifest) {
        for (const path of group.paths) {
          buffers.push(readFileSync(join(modelDir, path)))
        }
      }
      const weightData = Buffer.concat(buffers)
      return {
        modelTopology: modelJson.modelTopology,
        weightSpecs: modelJson.weightsManifest.flatMap(
          (g: any) => g.weights,
        ),
        weightData: weightData.buffer.slice(
          weightData.byteOffset,
          weightData.byteOffset + weightData.byteLength,
        ),
      }
    },
  }
}

export function makeEncoder(
  name: string,
  modelDir?: string,
  nativeSize = 1024,
): Encoder {
  if (name === 'patch-stats') return patchStatsEncoder()
  if (name === 'graph-model') {
    if (!modelDir) {
      throw new Error('graph-model encoder requires --model <dir>')
    }
    return graphModelEncoder({ modelDir, nativeSize })
  }
  throw new Error(`unknown encoder '${name}'`)
}
