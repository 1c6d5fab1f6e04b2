use std::io::{BufRead, Write};

use thiserror::Error;

use crate::grid::BlockKey;

pub const TRACE_HEADER: &str = "seq,op,frame,kx,ky,kz";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessOp {
    Lookup,
    Insert,
    Remove,
}

impl AccessOp {
    pub fn code(self) -> char {
        match self {
            AccessOp::Lookup => 'L',
            AccessOp::Insert => 'I',
            AccessOp::Remove => 'R',
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        match s {
            "L" => Some(AccessOp::Lookup),
            "I" => Some(AccessOp::Insert),
            "R" => Some(AccessOp::Remove),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AccessEvent {
    pub seq: u64,
    pub op: AccessOp,
    pub frame: u32,
    pub key: BlockKey,
}

#[derive(Debug, Error, PartialEq)]
#[error("trace line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

/// Ordered block-access events. `seq` is strictly increasing and `frame`
/// non-decreasing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AccessTrace {
    events: Vec<AccessEvent>,
}

impl AccessTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, op: AccessOp, frame: u32, key: BlockKey) {
        let seq = self.events.last().map_or(0, |e| e.seq + 1);
        debug_assert!(self.events.last().is_none_or(|e| e.frame <= frame));
        self.events.push(AccessEvent {
            seq,
            op,
            frame,
            key,
        });
    }

    /// Builds a trace of lookups, one per key, all in frame 0.
    pub fn from_lookups<I: IntoIterator<Item = BlockKey>>(keys: I) -> Self {
        let mut t = Self::new();
        for k in keys {
            t.push(AccessOp::Lookup, 0, k);
        }
        t
    }

    pub fn from_events(events: Vec<AccessEvent>) -> Result<Self, TraceParseError> {
        for (i, w) in events.windows(2).enumerate() {
            if w[1].seq <= w[0].seq || w[1].frame < w[0].frame {
                return Err(TraceParseError {
                    line: i + 3,
                    message: "seq must increase and frame must not decrease".into(),
                });
            }
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[AccessEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn last_frame(&self) -> Option<u32> {
        self.events.last().map(|e| e.frame)
    }

    /// Lookup events only: the block accesses the analyses count.
    pub fn lookups(&self) -> impl Iterator<Item = &AccessEvent> + '_ {
        self.events.iter().filter(|e| e.op == AccessOp::Lookup)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for e in &self.events {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                e.seq,
                e.op.code(),
                e.frame,
                e.key.x,
                e.key.y,
                e.key.z
            )?;
        }
        w.flush()
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, TraceParseError> {
        let mut events: Vec<AccessEvent> = Vec::new();
        let mut saw_header = false;
        for (i, line) in r.lines().enumerate() {
            let lineno = i + 1;
            let err = |message: String| TraceParseError {
                line: lineno,
                message,
            };
            let line = line.map_err(|e| err(e.to_string()))?;
            if !saw_header {
                if line != TRACE_HEADER {
                    return Err(err(format!("expected header `{TRACE_HEADER}`, found `{line}`")));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(err(format!("expected 6 fields, found {}", fields.len())));
            }
            let num = |idx: usize| -> Result<i64, TraceParseError> {
                fields[idx]
                    .parse::<i64>()
                    .map_err(|e| err(format!("field {} (`{}`): {e}", idx + 1, fields[idx])))
            };
            let seq = fields[0]
                .parse::<u64>()
                .map_err(|e| err(format!("seq `{}`: {e}", fields[0])))?;
            let op = AccessOp::from_code(fields[1]).ok_or_else(|| err(format!("unknown op `{}`", fields[1])))?;
            let frame = fields[2]
                .parse::<u32>()
                .map_err(|e| err(format!("frame `{}`: {e}", fields[2])))?;
            let mut key = [0i32; 3];
            for (j, k) in key.iter_mut().enumerate() {
                *k = i32::try_from(num(3 + j)?).map_err(|_| err("key component out of i32 range".into()))?;
            }
            if let Some(prev) = events.last() {
                if seq <= prev.seq {
                    return Err(err(format!("seq {seq} does not increase (previous {})", prev.seq)));
                }
                if frame < prev.frame {
                    return Err(err(format!("frame {frame} decreases (previous {})", prev.frame)));
                }
            }
            events.push(AccessEvent {
                seq,
                op,
                frame,
                key: BlockKey::new(key[0], key[1], key[2]),
            });
        }
        if !saw_header {
            return Err(TraceParseError {
                line: 1,
                message: "missing header".into(),
            });
        }
        Ok(Self { events })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_is_exact() {
        let mut t = AccessTrace::new();
        t.push(AccessOp::Lookup, 0, BlockKey::new(1, -2, 3));
        t.push(AccessOp::Remove, 4, BlockKey::new(0, 0, -7));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "seq,op,frame,kx,ky,kz\n0,L,0,1,-2,3\n1,R,4,0,0,-7\n"
        );
        assert_eq!(AccessTrace::read_csv(&buf[..]).unwrap(), t);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "seq,op,frame,kx,ky,kz\n0,L,0,1,2,3\n1,X,0,1,2,3\n";
        assert_eq!(AccessTrace::read_csv(bad.as_bytes()).unwrap_err().line, 3);
        let short = "seq,op,frame,kx,ky,kz\n0,L,0,1,2\n";
        assert_eq!(AccessTrace::read_csv(short.as_bytes()).unwrap_err().line, 2);
        let order = "seq,op,frame,kx,ky,kz\n5,L,0,1,2,3\n5,L,0,1,2,3\n";
        assert_eq!(AccessTrace::read_csv(order.as_bytes()).unwrap_err().line, 3);
        let header = "a,b\n";
        assert_eq!(AccessTrace::read_csv(header.as_bytes()).unwrap_err().line, 1);
        assert!(AccessTrace::read_csv("".as_bytes()).is_err());
    }

    #[test]
    fn header_only_is_empty() {
        let t = AccessTrace::read_csv("seq,op,frame,kx,ky,kz\n".as_bytes()).unwrap();
        assert!(t.is_empty());
    }
}
