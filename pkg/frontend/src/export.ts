/**
 * Batch export: encode every (step, tile) of a scene and write one .aecd
 * cache file each, with the naming and layout the engine's cache mode reads.
 * Writes are atomic (temp file then rename) and re-exports are idempotent:
 * the same scene, tile, and encoder always produce byte-identical files.
 */

import { mkdirSync, renameSync, writeFileSync } from 'node:fs'
import { join } from 'node:path'
import { cacheFilename, encodeAecd } from './aecd'
import { Encoder } from './encoder'
import { loadStepImage, readManifest } from './scene'
import { extractTile, planTiles } from './tiles'

export interface ExportJob {
  sceneDir: string
  tileSize: number
  outDir: string
  encoder: Encoder
}

export interface ExportResult {
  files: string[]
  steps: number
  tiles: number
}

export async function exportScene(job: ExportJob): Promise<ExportResult> {
  const manifest = readManifest(job.sceneDir)
  mkdirSync(job.outDir, { recursive: true })
  const files: string[] = []
  let tileCount = 0
  for (const step of manifest.steps) {
    const raster = loadStepImage(job.sceneDir, step)
    const tiles = planTiles(raster.height, raster.width, job.tileSize)
    tileCount = tiles.length
    for (const spec of tiles) {
      const grid = await job.encoder.encode(extractTile(raster, spec))
      if (grid.h * grid.stride !== job.tileSize) {
        throw new Error(
          `grid ${grid.h}x${grid.w} at stride ${grid.stride} does not cover ` +
            `tile size ${job.tileSize}`,
        )
      }
      const name = cacheFilename(step.timestamp, spec.x0, spec.y0)
      const path = join(job.outDir, name)
      const tmp = `${path}.tmp-${process.pid}`
      writeFileSync(tmp, encodeAecd(grid))
      renameSync(tmp, path)
      files.push(path)
    }
  }
  return { files, steps: manifest.steps.length, tiles: tileCount }
}
