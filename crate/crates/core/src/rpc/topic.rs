use std::fmt;

use super::frame::FrameError;

pub const ROOT: &str = "rfquack";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
        }
    }
}

/// `rfquack/<in|out>/<module>/<verb or kind>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub direction: Direction,
    pub module: String,
    pub name: String,
}

impl Topic {
    pub fn inbound(module: &str, verb: &str) -> Self {
        Self { direction: Direction::In, module: module.into(), name: verb.into() }
    }

    pub fn outbound(module: &str, kind: &str) -> Self {
        Self { direction: Direction::Out, module: module.into(), name: kind.into() }
    }

    pub fn parse(s: &str) -> Result<Self, FrameError> {
        let bad = || FrameError::BadTopic(s.to_string());
        let mut parts = s.split('/');
        if parts.next() != Some(ROOT) {
            return Err(bad());
        }
        let direction = match parts.next() {
            Some("in") => Direction::In,
            Some("out") => Direction::Out,
            _ => return Err(bad()),
        };
        let (Some(module), Some(name), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad());
        };
        let ok = |seg: &str| !seg.is_empty() && seg.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !ok(module) || !ok(name) {
            return Err(bad());
        }
        Ok(Self { direction, module: module.into(), name: name.into() })
    }

    /// `<module>/<name>` as used by the node's command router.
    pub fn route(&self) -> String {
        format!("{}/{}", self.module, self.name)
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{ROOT}/{}/{}/{}", self.direction.as_str(), self.module, self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        let t = Topic::parse("rfquack/in/radioA/set_modem_config").unwrap();
        assert_eq!(t, Topic::inbound("radioA", "set_modem_config"));
        assert_eq!(t.to_string(), "rfquack/in/radioA/set_modem_config");
        for bad in ["", "rfquack", "rfquack/in/radioA", "rfquack/up/a/b", "mqtt/in/a/b", "rfquack/in/a/b/c", "rfquack/in//b"] {
            assert!(Topic::parse(bad).is_err(), "{bad}");
        }
    }
}
