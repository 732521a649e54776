#!/usr/bin/env node
/** export-embeddings --scene <dir> --tile 2048 --out <dir> */

import yargs from 'yargs'
import { hideBin } from 'yargs/helpers'
import { makeEncoder } from './encoder'
import { exportScene } from './export'

async function main() {
  const argv = await yargs(hideBin(process.argv))
    .option('scene', { type: 'string', demandOption: true, describe: 'scene directory' })
    .option('tile', { type: 'number', default: 2048, describe: 'tile size in pixels' })
    .option('out', { type: 'string', demandOption: true, describe: 'output directory' })
    .option('encoder', {
      type: 'string',
      default: 'patch-stats',
      choices: ['patch-stats', 'graph-model'],
    })
    .option('model', { type: 'string', describe: 'graph-model weights directory' })
    .option('native-size', { type: 'number', default: 1024 })
    .strict()
    .parse()

  const encoder = makeEncoder(argv.encoder, argv.model, argv['native-size'])
  const result = await exportScene({
    sceneDir: argv.scene,
    tileSize: argv.tile,
    outDir: argv.out,
    encoder,
  })
  console.log(
    `exported ${result.files.length} cache files ` +
      `(${result.steps} steps x ${result.tiles} tiles, ${encoder.name}) to ${argv.out}`,
  )
}

main().catch(err => {
  console.error(`error: ${err.message}`)
  process.exit(1)
})
