/**
 * Reader for the binary alert stream written by the simulator.
 *
 * Layout per record, all integers big-endian:
 *   8-byte header: record type (u32), body length (u32, always 84)
 *   84-byte body:  9 u32 (sensor, event id, second, microsecond, signature,
 *                  generator, revision, classification, priority),
 *                  two 16-byte IPv6 addresses (IPv4 arrives IPv4-mapped),
 *                  source/dest port (u16), protocol/impact flag/impact/
 *                  blocked (u8), mpls label (u32), vlan id + pad (u16).
 */

export const RECORD_HEADER_LENGTH = 8;
export const RECORD_BODY_LENGTH = 84;
export const RECORD_LENGTH = RECORD_HEADER_LENGTH + RECORD_BODY_LENGTH;

export interface AlertRecord {
  recordType: number;
  sensorId: number;
  eventId: number;
  eventSecond: number;
  eventMicrosecond: number;
  signatureId: number;
  generatorId: number;
  signatureRevision: number;
  classificationId: number;
  priorityId: number;
  /** raw 16-byte source address */
  ipSource: Uint8Array;
  /** raw 16-byte destination address */
  ipDestination: Uint8Array;
  sourcePort: number;
  destPort: number;
  protocol: number;
  impactFlag: number;
  impact: number;
  blocked: number;
  mplsLabel: number;
  vlanId: number;
}

export class AlertStreamError extends Error {}

/** Parse a whole alert stream; throws on truncation or a bad body length. */
export function parseAlertStream(data: Buffer): AlertRecord[] {
  const records: AlertRecord[] = [];
  let offset = 0;
  while (offset < data.length) {
    if (data.length - offset < RECORD_HEADER_LENGTH) {
      throw new AlertStreamError(
        `truncated record header at byte ${offset} of ${data.length}`,
      );
    }
    const recordType = data.readUInt32BE(offset);
    const bodyLength = data.readUInt32BE(offset + 4);
    if (bodyLength !== RECORD_BODY_LENGTH) {
      throw new AlertStreamError(
        `record at byte ${offset}: body length ${bodyLength}, expected ${RECORD_BODY_LENGTH}`,
      );
    }
    if (data.length - offset < RECORD_LENGTH) {
      throw new AlertStreamError(
        `truncated record body at byte ${offset} of ${data.length}`,
      );
    }
    const b = offset + RECORD_HEADER_LENGTH;
    records.push({
      recordType,
      sensorId: data.readUInt32BE(b),
      eventId: data.readUInt32BE(b + 4),
      eventSecond: data.readUInt32BE(b + 8),
      eventMicrosecond: data.readUInt32BE(b + 12),
      signatureId: data.readUInt32BE(b + 16),
      generatorId: data.readUInt32BE(b + 20),
      signatureRevision: data.readUInt32BE(b + 24),
      classificationId: data.readUInt32BE(b + 28),
      priorityId: data.readUInt32BE(b + 32),
      ipSource: Uint8Array.prototype.slice.call(data, b + 36, b + 52),
      ipDestination: Uint8Array.prototype.slice.call(data, b + 52, b + 68),
      sourcePort: data.readUInt16BE(b + 68),
      destPort: data.readUInt16BE(b + 70),
      protocol: data.readUInt8(b + 72),
      impactFlag: data.readUInt8(b + 73),
      impact: data.readUInt8(b + 74),
      blocked: data.readUInt8(b + 75),
      mplsLabel: data.readUInt32BE(b + 76),
      vlanId: data.readUInt16BE(b + 80),
    });
    offset += RECORD_LENGTH;
  }
  return records;
}

/**
 * Collapse a 16-byte address to one number. IPv4-mapped addresses use the
 * embedded 32-bit value; anything else folds the four words with xor so
 * distinct hosts stay distinct with overwhelming probability.
 */
export function addressToInt(address: Uint8Array): number {
  const view = new DataView(address.buffer, address.byteOffset, 16);
  const words = [
    view.getUint32(0),
    view.getUint32(4),
    view.getUint32(8),
    view.getUint32(12),
  ];
  if (words[0] === 0 && words[1] === 0 && words[2] === 0xffff) {
    return words[3];
  }
  return ((words[0] ^ words[1] ^ words[2] ^ words[3]) >>> 0);
}
