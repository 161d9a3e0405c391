// Feature extraction and persistence diagrams for voxel volumes, backed
// by the voxtopo command line tool.  Volumes travel as NPY files and
// results come back through the tool's CSV/JSON formats, so every number
// matches a direct CLI invocation bit for bit.

import { execFileSync } from 'node:child_process'
import * as fs from 'node:fs'
import * as os from 'node:os'
import * as path from 'node:path'

import { NpyData, decodeNpy, encodeNpy } from './npy'

export { NpyData, decodeNpy, encodeNpy } from './npy'

/** Voxel grid in C order: dims = [nx, ny, nz], z varying fastest. */
export interface Volume {
    data: NpyData
    dims: number[]
}

/** Extraction settings; omitted fields use the CLI defaults. */
export interface ExtractOptions {
    /** quantization levels (default 100) */
    levels?: number
    /** 'minmax' or 'fixed:LO:HI' */
    range?: string
    /** 0 = full volume, else a centered slab of this many slices */
    slices?: number
    axis?: 'x' | 'y' | 'z'
    direction?: 'sub' | 'super'
    /** 'betti' or 'silhouette:P' */
    vec?: string
    /** homology dimensions to vectorize, e.g. '0,1,2' */
    dims?: string
}

export interface FeatureVector {
    names: string[]
    values: Float64Array
}

/** Birth/death pair; death is null for essential classes. */
export type Pair = [number, number | null]

export interface Diagrams {
    nLevels: number
    direction: string
    /** homology dimension (as a string key) -> pairs */
    dims: Record<string, Pair[]>
}

/** Path of the CLI binary; override with the VOXTOPO_CLI env variable. */
export function cliPath(): string {
    return process.env.VOXTOPO_CLI || 'voxtopo'
}

function checkVolume(volume: Volume): void {
    const { data, dims } = volume
    if (dims.length !== 2 && dims.length !== 3)
        throw new RangeError(`volume must be 2D or 3D, got ${dims.length} dims`)
    for (const d of dims)
        if (!Number.isInteger(d) || d < 1)
            throw new RangeError(`bad volume dims [${dims.join(', ')}]`)
    const count = dims.reduce((a, b) => a * b, 1)
    if (data.length !== count)
        throw new RangeError(
            `data has ${data.length} elements, dims [${dims.join(', ')}] need ${count}`)
    if (data instanceof Float32Array || data instanceof Float64Array) {
        for (let i = 0; i < data.length; i++)
            if (!Number.isFinite(data[i]))
                throw new RangeError(`non-finite value at flat index ${i}`)
    }
}

function optionFlags(options: ExtractOptions): string[] {
    const flags: string[] = []
    if (options.levels !== undefined) flags.push('--levels', String(options.levels))
    if (options.range !== undefined) flags.push('--range', options.range)
    if (options.slices !== undefined) flags.push('--slices', String(options.slices))
    if (options.axis !== undefined) flags.push('--axis', options.axis)
    if (options.direction !== undefined) flags.push('--direction', options.direction)
    if (options.vec !== undefined) flags.push('--vec', options.vec)
    if (options.dims !== undefined) flags.push('--dims', options.dims)
    return flags
}

function runCli(args: string[]): void {
    try {
        execFileSync(cliPath(), args, { stdio: ['ignore', 'pipe', 'pipe'] })
    } catch (err) {
        const stderr = (err as { stderr?: Buffer }).stderr?.toString() ?? ''
        throw new Error(`${cliPath()} ${args[0]} failed: ${stderr.trim() || err}`)
    }
}

function inWorkDir<T>(fn: (dir: string) => T): T {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'voxtopo-'))
    try {
        return fn(dir)
    } finally {
        fs.rmSync(dir, { recursive: true, force: true })
    }
}

/** Extract one feature vector; parity with `voxtopo extract`. */
export function extractFeatures(
    volume: Volume, options: ExtractOptions = {},
): FeatureVector {
    checkVolume(volume)
    return inWorkDir((dir) => {
        const npy = path.join(dir, 'vol.npy')
        fs.writeFileSync(npy, encodeNpy(volume.data, volume.dims))
        const manifest = path.join(dir, 'manifest.json')
        fs.writeFileSync(manifest, JSON.stringify({
            entries: [{ path: 'vol.npy', label: 'v', id: 'vol' }],
        }))
        const csv = path.join(dir, 'features.csv')
        runCli(['extract', manifest, '--out', csv, ...optionFlags(options)])
        const lines = fs.readFileSync(csv, 'utf8').trim().split('\n')
        if (lines.length !== 2)
            throw new Error(`expected a header and one row, got ${lines.length} lines`)
        const names = lines[0].split(',').slice(2)
        const values = Float64Array.from(lines[1].split(',').slice(2), Number)
        return { names, values }
    })
}

/** Compute persistence diagrams; parity with `voxtopo diagram`. */
export function persistenceDiagrams(
    volume: Volume, options: ExtractOptions = {},
): Diagrams {
    checkVolume(volume)
    return inWorkDir((dir) => {
        const npy = path.join(dir, 'vol.npy')
        fs.writeFileSync(npy, encodeNpy(volume.data, volume.dims))
        const out = path.join(dir, 'pd.json')
        runCli(['diagram', npy, '--out', out, ...optionFlags(options)])
        const payload = JSON.parse(fs.readFileSync(out, 'utf8')) as {
            n_levels: number
            direction: string
            dims: Record<string, Array<[number, number | null]>>
        }
        const dims: Record<string, Pair[]> = {}
        for (const [dim, pairs] of Object.entries(payload.dims))
            dims[dim] = pairs.map(([b, d]) => [b, d] as Pair)
        return { nLevels: payload.n_levels, direction: payload.direction, dims }
    })
}

/** Build a Volume from nested arrays ([x][y][z] or [x][y]). */
export function volumeFromNested(nested: number[][] | number[][][]): Volume {
    const dims: number[] = []
    let probe: unknown = nested
    while (Array.isArray(probe)) {
        dims.push(probe.length)
        probe = probe[0]
    }
    if (dims.length !== 2 && dims.length !== 3)
        throw new RangeError(`nested array must be 2D or 3D, got ${dims.length} levels`)
    const flat: number[] = []
    const walk = (node: unknown, depth: number): void => {
        if (depth === dims.length) {
            if (typeof node !== 'number')
                throw new RangeError('ragged or non-numeric nested array')
            flat.push(node)
            return
        }
        if (!Array.isArray(node) || node.length !== dims[depth])
            throw new RangeError('ragged or non-numeric nested array')
        for (const child of node) walk(child, depth + 1)
    }
    walk(nested, 0)
    return { data: Float64Array.from(flat), dims }
}
