import { execFileSync } from 'node:child_process'
import * as fs from 'node:fs'
import * as os from 'node:os'
import * as path from 'node:path'

import { afterAll, beforeAll, expect, test } from 'vitest'

import {
    ExtractOptions,
    Volume,
    cliPath,
    decodeNpy,
    encodeNpy,
    extractFeatures,
    persistenceDiagrams,
    volumeFromNested,
} from '../src/index'

// ten volumes covering every phantom shape, at oracle-friendly sizes
const SYNTH_TOML = `\
[synth]
levels = 10
seed = 99

[[synth.classes]]
label = "ball"
shape = "solid_ball"
count = 2
dims = [11, 11, 11]
geometry = { radius = 3.0 }
foreground_bin = 3
background_bin = 8
noise = 1

[[synth.classes]]
label = "shell"
shape = "hollow_shell"
count = 2
dims = [12, 12, 12]
geometry = { inner_radius = 2.5, outer_radius = 4.5 }
foreground_bin = 3
background_bin = 8

[[synth.classes]]
label = "torus"
shape = "solid_torus"
count = 2
dims = [14, 14, 10]
geometry = { ring_radius = 4.0, tube_radius = 2.0 }
foreground_bin = 3
background_bin = 8
noise = 1

[[synth.classes]]
label = "blobs"
shape = "two_blobs"
count = 2
dims = [14, 9, 9]
geometry = { radius = 2.0, separation = 7.0 }
foreground_bin = 3
background_bin = 8

[[synth.classes]]
label = "noise"
shape = "random_noise"
count = 2
dims = [8, 8, 8]
`

// mirrors the [extraction] table the synth manifest carries
const FIXTURE_OPTIONS: ExtractOptions = {
    levels: 10, range: 'fixed:1:10', slices: 0,
}

interface Entry { path: string; label: string; id: string }

let root: string
let entries: Entry[]

function cli(args: string[]): string {
    return execFileSync(cliPath(), args, { encoding: 'utf8' })
}

function fixtureFile(entry: Entry): string {
    return path.join(root, 'vols', entry.path)
}

function loadVolume(file: string): Volume {
    const { data, shape, fortranOrder } = decodeNpy(fs.readFileSync(file))
    expect(fortranOrder).toBe(false)
    return { data, dims: shape }
}

function expectSameValues(actual: Float64Array, reference: number[]): void {
    expect(actual.length).toBe(reference.length)
    for (let i = 0; i < actual.length; i++) {
        if (!Object.is(actual[i], reference[i]))
            throw new Error(
                `value ${i} differs: ${actual[i]} vs ${reference[i]}`)
    }
}

beforeAll(() => {
    root = fs.mkdtempSync(path.join(os.tmpdir(), 'voxtopo-parity-'))
    fs.writeFileSync(path.join(root, 'synth.toml'), SYNTH_TOML)
    cli(['synth', path.join(root, 'synth.toml'), '--out', path.join(root, 'vols')])
    const manifest = JSON.parse(
        fs.readFileSync(path.join(root, 'vols', 'manifest.json'), 'utf8'))
    entries = manifest.entries
})

afterAll(() => {
    fs.rmSync(root, { recursive: true, force: true })
})

test('fixture set covers all shapes', () => {
    expect(entries).toHaveLength(10)
    const labels = new Set(entries.map((e) => e.label))
    expect(labels).toEqual(new Set(['ball', 'shell', 'torus', 'blobs', 'noise']))
})

test('extractFeatures matches the CLI on every fixture', () => {
    const csv = path.join(root, 'reference.csv')
    cli(['extract', path.join(root, 'vols', 'manifest.json'), '--out', csv])
    const lines = fs.readFileSync(csv, 'utf8').trim().split('\n')
    const names = lines[0].split(',').slice(2)
    const byId = new Map<string, number[]>()
    for (const line of lines.slice(1)) {
        const cells = line.split(',')
        byId.set(cells[0], cells.slice(2).map(Number))
    }

    for (const entry of entries) {
        const volume = loadVolume(fixtureFile(entry))
        const fv = extractFeatures(volume, FIXTURE_OPTIONS)
        expect(fv.names).toEqual(names)
        expectSameValues(fv.values, byId.get(entry.id)!)
    }
})

test('persistenceDiagrams matches the CLI on every fixture', () => {
    for (const entry of entries) {
        const out = path.join(root, `${entry.id}.pd.json`)
        cli(['diagram', fixtureFile(entry), '--out', out,
             '--levels', '10', '--range', 'fixed:1:10'])
        const reference = JSON.parse(fs.readFileSync(out, 'utf8'))

        const pds = persistenceDiagrams(loadVolume(fixtureFile(entry)), FIXTURE_OPTIONS)
        expect(pds.nLevels).toBe(reference.n_levels)
        expect(pds.direction).toBe(reference.direction)
        expect(pds.dims).toEqual(reference.dims)
    }
})

test('empty options mirror the CLI defaults', () => {
    // deterministic float volume from a small linear congruential stream
    const dims = [5, 6, 4]
    const data = new Float64Array(5 * 6 * 4)
    let state = 123456789
    for (let i = 0; i < data.length; i++) {
        state = (1103515245 * state + 12345) % 2147483648
        data[i] = state / 2147483648
    }
    const file = path.join(root, 'random.npy')
    fs.writeFileSync(file, encodeNpy(data, dims))
    const manifest = path.join(root, 'random_manifest.json')
    fs.writeFileSync(manifest, JSON.stringify({
        entries: [{ path: 'random.npy', label: 'v', id: 'vol' }],
    }))
    const csv = path.join(root, 'random.csv')
    cli(['extract', manifest, '--out', csv])
    const lines = fs.readFileSync(csv, 'utf8').trim().split('\n')

    const fv = extractFeatures({ data, dims })
    expect(fv.names).toEqual(lines[0].split(',').slice(2))
    expectSameValues(fv.values, lines[1].split(',').slice(2).map(Number))
    expect(fv.values.length).toBe(300)
})

test('silhouette, dim subset and superlevel options reach the CLI', () => {
    const entry = entries.find((e) => e.label === 'shell')!
    const options: ExtractOptions = {
        ...FIXTURE_OPTIONS, vec: 'silhouette:2', dims: '0,2', direction: 'super',
    }
    const csv = path.join(root, 'silhouette.csv')
    const manifest = path.join(root, 'silhouette_manifest.json')
    fs.writeFileSync(manifest, JSON.stringify({
        entries: [{ path: path.resolve(fixtureFile(entry)), label: 'v', id: 'vol' }],
    }))
    cli(['extract', manifest, '--out', csv,
         '--levels', '10', '--range', 'fixed:1:10', '--slices', '0',
         '--vec', 'silhouette:2', '--dims', '0,2', '--direction', 'super'])
    const lines = fs.readFileSync(csv, 'utf8').trim().split('\n')

    const fv = extractFeatures(loadVolume(fixtureFile(entry)), options)
    expect(fv.names).toEqual(lines[0].split(',').slice(2))
    expect(fv.names[0]).toBe('s0_001')
    expect(fv.names).toHaveLength(20)
    expectSameValues(fv.values, lines[1].split(',').slice(2).map(Number))
})

test('constant volume: one component alive from the first level', () => {
    const nested = Array.from({ length: 4 }, () =>
        Array.from({ length: 4 }, () => Array.from({ length: 4 }, () => 7)))
    const volume = volumeFromNested(nested as number[][][])

    const fv = extractFeatures(volume)
    expect(fv.values).toHaveLength(300)
    expect(Array.from(fv.values.slice(0, 100))).toEqual(Array(100).fill(1))
    expect(Array.from(fv.values.slice(100))).toEqual(Array(200).fill(0))

    const pds = persistenceDiagrams(volume)
    expect(pds.dims['0']).toEqual([[1, null]])
    expect(pds.dims['1']).toEqual([])
    expect(pds.dims['2']).toEqual([])
})

test('2D volumes have no 2-cycles', () => {
    const data = new Float64Array(30)
    for (let i = 0; i < data.length; i++) data[i] = (i * 7) % 11
    const fv = extractFeatures({ data, dims: [6, 5] }, { levels: 10 })
    expect(fv.values).toHaveLength(30)
    expect(Array.from(fv.values.slice(20))).toEqual(Array(10).fill(0))
    const pds = persistenceDiagrams({ data, dims: [6, 5] }, { levels: 10 })
    expect(pds.dims['2']).toEqual([])
})

test('NPY codec round-trips and matches the reference writer', () => {
    const cases: Array<[Volume['data'], number[]]> = [
        [Uint8Array.from([1, 2, 3, 4, 5, 6]), [2, 3]],
        [Int16Array.from([-5, 0, 5, 10]), [4]],
        [Int32Array.from([7, 8, 9, 10, 11, 12]), [3, 2]],
        [Float32Array.from([0.5, -1.5]), [2]],
        [Float64Array.from([Math.PI, Math.E, 0, -0]), [2, 2]],
    ]
    for (const [data, shape] of cases) {
        const decoded = decodeNpy(encodeNpy(data, shape))
        expect(decoded.shape).toEqual(shape)
        expect(decoded.fortranOrder).toBe(false)
        expect(Array.from(decoded.data)).toEqual(Array.from(data))
        expect(decoded.data.constructor).toBe(data.constructor)
    }

    // a file written by the reference implementation re-encodes byte for byte
    const reference = fs.readFileSync(fixtureFile(entries[0]))
    const decoded = decodeNpy(reference)
    expect(Buffer.compare(encodeNpy(decoded.data, decoded.shape), reference)).toBe(0)
})

test('input validation', () => {
    const good = new Float64Array(8)
    expect(() => extractFeatures({ data: good, dims: [8] })).toThrow(/2D or 3D/)
    expect(() => extractFeatures({ data: good, dims: [2, 2, 3] }))
        .toThrow(/need 12/)
    expect(() => extractFeatures({ data: good, dims: [2, 0, 4] }))
        .toThrow(/bad volume dims/)
    const withNan = Float64Array.from([1, 2, NaN, 4])
    expect(() => persistenceDiagrams({ data: withNan, dims: [2, 2] }))
        .toThrow(/non-finite/)
    expect(() => volumeFromNested([[1, 2], [3]])).toThrow(/ragged/)
    const bad = { data: good, dims: [2, 2, 2] }
    expect(() => extractFeatures(bad, { range: 'banana' })).toThrow(/failed/)
})
