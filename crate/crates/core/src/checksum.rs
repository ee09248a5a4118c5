//! 16-bit CCITT checksum appended little-endian to OOK frames.

use crc::{Crc, CRC_16_IBM_3740};

const CCITT: Crc<u16> = Crc::<u16>::new(&CRC_16_IBM_3740);

pub fn crc16(data: &[u8]) -> u16 {
    CCITT.checksum(data)
}

/// `data` followed by its checksum.
pub fn with_crc(data: &[u8]) -> Vec<u8> {
    let mut out = data.to_vec();
    out.extend_from_slice(&crc16(data).to_le_bytes());
    out
}

/// Splits off and verifies a trailing checksum.
pub fn strip_crc(frame: &[u8]) -> Option<&[u8]> {
    if frame.len() < 2 {
        return None;
    }
    let (data, tail) = frame.split_at(frame.len() - 2);
    (crc16(data).to_le_bytes() == tail).then_some(data)
}
