//! Wire framing: `"RQ" | topic_len u16 BE | topic | payload_len u32 BE | payload`.
//!
//! The payload is compact JSON with sorted object keys, so equal messages
//! always encode to equal bytes.

use serde_json::Value;
use thiserror::Error;

use super::topic::Topic;

pub const MAGIC: [u8; 2] = *b"RQ";
pub const HEADER_LEN: usize = 8;
/// Largest encoded frame accepted in either direction.
pub const MAX_FRAME: usize = 64 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("bad magic")]
    BadMagic,
    #[error("truncated frame")]
    Truncated,
    #[error("frame of {0} bytes exceeds {MAX_FRAME}")]
    Oversize(usize),
    #[error("topic is not UTF-8")]
    TopicEncoding,
    #[error("bad topic {0:?}")]
    BadTopic(String),
    #[error("bad payload: {0}")]
    Payload(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub topic: String,
    pub payload: Value,
}

impl Frame {
    pub fn new(topic: impl Into<String>, payload: Value) -> Self {
        Self { topic: topic.into(), payload }
    }

    pub fn parsed_topic(&self) -> Result<Topic, FrameError> {
        Topic::parse(&self.topic)
    }
}

/// Canonical payload bytes.
pub fn canonical_json(v: &Value) -> Vec<u8> {
    // serde_json maps are ordered by key unless `preserve_order` is enabled.
    serde_json::to_vec(v).expect("Value always serializes")
}

pub fn encode(topic: &str, payload: &Value) -> Result<Vec<u8>, FrameError> {
    Topic::parse(topic)?;
    let body = canonical_json(payload);
    let total = HEADER_LEN + topic.len() + body.len();
    if total > MAX_FRAME {
        return Err(FrameError::Oversize(total));
    }
    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(topic.len() as u16).to_be_bytes());
    out.extend_from_slice(topic.as_bytes());
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(&body);
    Ok(out)
}

pub fn encode_frame(f: &Frame) -> Result<Vec<u8>, FrameError> {
    encode(&f.topic, &f.payload)
}

/// Length of the frame at the start of `buf`, once enough bytes are known.
fn frame_len(buf: &[u8]) -> Result<Option<usize>, FrameError> {
    if buf.len() >= 2 && buf[..2] != MAGIC {
        return Err(FrameError::BadMagic);
    }
    if buf.len() < 4 {
        return Ok(None);
    }
    let topic_len = u16::from_be_bytes([buf[2], buf[3]]) as usize;
    let at = 4 + topic_len;
    if HEADER_LEN + topic_len > MAX_FRAME {
        return Err(FrameError::Oversize(HEADER_LEN + topic_len));
    }
    if buf.len() < at + 4 {
        return Ok(None);
    }
    let payload_len = u32::from_be_bytes([buf[at], buf[at + 1], buf[at + 2], buf[at + 3]]) as usize;
    let total = HEADER_LEN + topic_len + payload_len;
    if total > MAX_FRAME {
        return Err(FrameError::Oversize(total));
    }
    Ok(Some(total))
}

fn parse_body(frame: &[u8]) -> Result<Frame, FrameError> {
    let topic_len = u16::from_be_bytes([frame[2], frame[3]]) as usize;
    let topic = std::str::from_utf8(&frame[4..4 + topic_len]).map_err(|_| FrameError::TopicEncoding)?;
    Topic::parse(topic)?;
    let body = &frame[HEADER_LEN + topic_len..];
    let payload = serde_json::from_slice(body).map_err(|e| FrameError::Payload(e.to_string()))?;
    Ok(Frame { topic: topic.to_string(), payload })
}

/// Decodes exactly one frame from the start of `buf`, returning it and the
/// number of bytes consumed.
pub fn decode(buf: &[u8]) -> Result<(Frame, usize), FrameError> {
    let len = frame_len(buf)?.ok_or(FrameError::Truncated)?;
    if buf.len() < len {
        return Err(FrameError::Truncated);
    }
    Ok((parse_body(&buf[..len])?, len))
}

/// Incremental decoder that survives garbage, bad frames and truncation by
/// resynchronizing on the next magic that starts a well-formed frame.
#[derive(Debug, Default)]
pub struct FrameDecoder {
    buf: Vec<u8>,
}

impl FrameDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    fn next_magic(&self, from: usize) -> Option<usize> {
        self.buf.get(from..)?.windows(2).position(|w| w == MAGIC).map(|p| p + from)
    }

    /// Drops everything before the next magic after the current start.
    fn skip(&mut self) {
        let keep = self.next_magic(1).unwrap_or_else(|| {
            // A trailing 'R' may be the first half of the next magic.
            if self.buf.last() == Some(&MAGIC[0]) { self.buf.len() - 1 } else { self.buf.len() }
        });
        self.buf.drain(..keep);
    }

    /// A complete, valid frame starting at some later magic.
    fn later_valid_frame(&self) -> Option<usize> {
        let mut from = 1;
        while let Some(p) = self.next_magic(from) {
            if decode(&self.buf[p..]).is_ok() {
                return Some(p);
            }
            from = p + 1;
        }
        None
    }

    /// Next decoded frame or framing error; `None` means more bytes are needed.
    pub fn next_frame(&mut self) -> Option<Result<Frame, FrameError>> {
        if self.buf.is_empty() {
            return None;
        }
        if self.buf[0] != MAGIC[0] || (self.buf.len() >= 2 && self.buf[1] != MAGIC[1]) {
            let before = self.buf.len();
            self.skip();
            return (self.buf.len() < before).then_some(Err(FrameError::BadMagic));
        }
        match frame_len(&self.buf) {
            Err(e) => {
                self.skip();
                Some(Err(e))
            }
            Ok(Some(len)) if self.buf.len() >= len => {
                let out = parse_body(&self.buf[..len]);
                if out.is_ok() {
                    self.buf.drain(..len);
                } else {
                    self.skip();
                }
                Some(out)
            }
            Ok(_) => {
                // Incomplete; if a whole frame already follows, this one was cut short.
                let p = self.later_valid_frame()?;
                self.buf.drain(..p);
                Some(Err(FrameError::Truncated))
            }
        }
    }

    /// Remaining bytes at end of stream form a truncated frame.
    pub fn finish(&mut self) -> Option<FrameError> {
        if self.buf.is_empty() {
            return None;
        }
        self.buf.clear();
        Some(FrameError::Truncated)
    }
}
