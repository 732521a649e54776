/** Scene directory loading: manifest.json plus one PNG per time step. */

import { readFileSync } from 'node:fs'
import { join } from 'node:path'
import { PNG } from 'pngjs'
import { Raster } from './tiles'

export interface SceneStep {
  timestamp: string
  file: string
}

export interface SceneManifest {
  event_id?: string
  category?: string
  steps: SceneStep[]
  gt_mask?: string
}

export function readManifest(sceneDir: string): SceneManifest {
  const manifest = JSON.parse(
    readFileSync(join(sceneDir, 'manifest.json'), 'utf8'),
  ) as SceneManifest
  if (!manifest.steps || manifest.steps.length < 2) {
    throw new Error('insufficient time steps: manifest lists fewer than 2')
  }
  // ascending by timestamp, same ordering rule as the engine
  manifest.steps = [...manifest.steps].sort((a, b) =>
    String(a.timestamp) < String(b.timestamp) ? -1 : 1,
  )
  return manifest
}

/** Decode one step image to a float RGB raster in [0, 1]. */
export function loadStepImage(sceneDir: string, step: SceneStep): Raster {
  const png = PNG.sync.read(readFileSync(join(sceneDir, step.file)))
  const channels = 3
  const data = new Float32Array(png.height * png.width * channels)
  for (let i = 0; i < png.height * png.width; i++) {
    for (let c = 0; c < channels; c++) {
      data[i * channels + c] = png.data[i * 4 + c] / 255
    }
  }
  return { data, height: png.height, width: png.width, channels }
}
