// Minimal NPY (version 1.0) encoder/decoder for little-endian hosts.

import * as os from 'node:os'

export type NpyData =
    Uint8Array | Int16Array | Uint16Array | Int32Array |
    Float32Array | Float64Array

const MAGIC = Buffer.from('\x93NUMPY', 'latin1')

const DESCRS: Array<[string, new (b: ArrayBuffer) => NpyData]> = [
    ['|u1', Uint8Array],
    ['<i2', Int16Array],
    ['<u2', Uint16Array],
    ['<i4', Int32Array],
    ['<f4', Float32Array],
    ['<f8', Float64Array],
]

function descrOf(data: NpyData): string {
    for (const [descr, ctor] of DESCRS)
        if (data instanceof ctor) return descr
    throw new TypeError(`unsupported array type ${data.constructor.name}`)
}

function assertLittleEndian(): void {
    if (os.endianness() !== 'LE')
        throw new Error('NPY codec assumes a little-endian host')
}

function shapeLiteral(shape: number[]): string {
    if (shape.length === 1) return `(${shape[0]},)`
    return `(${shape.join(', ')})`
}

export function encodeNpy(data: NpyData, shape: number[]): Buffer {
    assertLittleEndian()
    const count = shape.reduce((a, b) => a * b, 1)
    if (data.length !== count)
        throw new RangeError(
            `array has ${data.length} elements, shape ${shapeLiteral(shape)} needs ${count}`)
    const dict =
        `{'descr': '${descrOf(data)}', 'fortran_order': False, ` +
        `'shape': ${shapeLiteral(shape)}, }`
    // total header (magic + version + length field + dict + padding) is
    // padded with spaces to a multiple of 64 and terminated by \n
    const prefix = MAGIC.length + 2 + 2
    const pad = (64 - ((prefix + dict.length + 1) % 64)) % 64
    const headerText = dict + ' '.repeat(pad) + '\n'
    const header = Buffer.alloc(prefix + headerText.length)
    MAGIC.copy(header)
    header[MAGIC.length] = 1  // major
    header[MAGIC.length + 1] = 0  // minor
    header.writeUInt16LE(headerText.length, MAGIC.length + 2)
    header.write(headerText, prefix, 'latin1')
    const body = Buffer.from(data.buffer, data.byteOffset, data.byteLength)
    return Buffer.concat([header, body])
}

export interface DecodedNpy {
    data: NpyData
    shape: number[]
    fortranOrder: boolean
}

export function decodeNpy(buf: Buffer): DecodedNpy {
    assertLittleEndian()
    if (buf.length < 10 || !buf.subarray(0, MAGIC.length).equals(MAGIC))
        throw new Error('not an NPY file')
    const major = buf[MAGIC.length]
    let headerLen: number
    let offset: number
    if (major === 1) {
        headerLen = buf.readUInt16LE(MAGIC.length + 2)
        offset = MAGIC.length + 4
    } else if (major === 2 || major === 3) {
        headerLen = buf.readUInt32LE(MAGIC.length + 2)
        offset = MAGIC.length + 6
    } else {
        throw new Error(`unsupported NPY version ${major}`)
    }
    const header = buf.subarray(offset, offset + headerLen).toString('latin1')
    const m = header.match(
        /'descr':\s*'([^']+)',\s*'fortran_order':\s*(True|False),\s*'shape':\s*\(([^)]*)\)/)
    if (!m) throw new Error(`unparseable NPY header: ${header.trim()}`)
    const [, descr, fortran, shapeText] = m
    const entry = DESCRS.find(([d]) => d === descr)
    if (!entry) throw new Error(`unsupported NPY dtype ${descr}`)
    const shape = shapeText.split(',')
        .map((s) => s.trim())
        .filter((s) => s.length > 0)
        .map((s) => parseInt(s, 10))
    const body = buf.subarray(offset + headerLen)
    // copy into a fresh ArrayBuffer: Buffer views may be misaligned
    const bytes = new Uint8Array(body.length)
    bytes.set(body)
    return {
        data: new entry[1](bytes.buffer),
        shape,
        fortranOrder: fortran === 'True',
    }
}
