use super::scenario::CarReceiverSpec;

/// Outcome of presenting a decoded payload to a receiver actor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accepted { code: u32 },
    /// Code already consumed or behind the counter.
    Replayed { code: u32 },
    /// Code too far ahead of the counter.
    OutOfWindow { code: u32 },
    /// Payload too short to hold a code.
    Malformed,
    /// In-band interference; nothing was received.
    Jammed,
}

impl Decision {
    pub fn accepted(&self) -> bool {
        matches!(self, Decision::Accepted { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingCodeReceiver {
    pub spec: CarReceiverSpec,
    pub next_code: u32,
}

impl RollingCodeReceiver {
    pub fn new(spec: CarReceiverSpec) -> Self {
        Self { next_code: spec.next_code, spec }
    }

    pub fn code_of(&self, payload: &[u8]) -> Option<u32> {
        let o = self.spec.code_offset;
        let b = payload.get(o..o + 4)?;
        Some(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    /// Window check; accepted codes advance the counter past themselves.
    pub fn offer(&mut self, payload: &[u8]) -> Decision {
        let Some(code) = self.code_of(payload) else {
            return Decision::Malformed;
        };
        if code < self.next_code {
            Decision::Replayed { code }
        } else if code - self.next_code >= self.spec.window {
            Decision::OutOfWindow { code }
        } else {
            self.next_code = code + 1;
            Decision::Accepted { code }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rx() -> RollingCodeReceiver {
        RollingCodeReceiver::new(CarReceiverSpec {
            id: "car".into(),
            carrier_hz: 433.92e6,
            bandwidth_hz: 300e3,
            bitrate: 3400.0,
            sync_word: vec![0xd3, 0x91],
            next_code: 10,
            window: 4,
            code_offset: 0,
        })
    }

    #[test]
    fn window_and_replay() {
        let mut r = rx();
        assert_eq!(r.offer(&10u32.to_be_bytes()), Decision::Accepted { code: 10 });
        assert_eq!(r.offer(&10u32.to_be_bytes()), Decision::Replayed { code: 10 });
        assert_eq!(r.offer(&12u32.to_be_bytes()), Decision::Accepted { code: 12 });
        assert_eq!(r.offer(&11u32.to_be_bytes()), Decision::Replayed { code: 11 });
        assert_eq!(r.offer(&17u32.to_be_bytes()), Decision::OutOfWindow { code: 17 });
        assert_eq!(r.offer(&[1, 2]), Decision::Malformed);
    }
}
