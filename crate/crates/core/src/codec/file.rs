// SPDX-License-Identifier: Apache-2.0

//! Binary token file: `"PTKN"`, version `u16`, scheme `u8`, count `u32`,
//! then `count` token IDs as `u16` and `count` indicators as `i16`
//! (`-1` = none). All integers little-endian.

use std::fmt::Write as _;
use std::io::Write;

use super::{Scheme, TokenSequence};
use crate::error::{Result, RigError};

pub const FILE_MAGIC: &[u8; 4] = b"PTKN";
pub const FILE_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 1 + 4;

pub fn write_token_file(t: &TokenSequence, mut out: impl Write) -> Result<()> {
    t.check_aligned()?;
    let count = u32::try_from(t.len()).map_err(|_| RigError::arg("token stream too long"))?;
    let mut buf = Vec::with_capacity(HEADER_LEN + 4 * t.len());
    buf.extend_from_slice(FILE_MAGIC);
    buf.extend_from_slice(&FILE_VERSION.to_le_bytes());
    buf.push(t.scheme.code());
    buf.extend_from_slice(&count.to_le_bytes());
    for tok in &t.tokens {
        buf.extend_from_slice(&tok.to_le_bytes());
    }
    for ind in &t.indicators {
        let v: i16 = match ind {
            None => -1,
            Some(i) => i16::try_from(*i).map_err(|_| RigError::arg("indicator out of range"))?,
        };
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn bad(msg: impl Into<String>) -> RigError {
    RigError::Codec(msg.into())
}

pub fn read_token_file(bytes: &[u8]) -> Result<TokenSequence> {
    if bytes.len() < HEADER_LEN {
        return Err(bad("file shorter than header"));
    }
    if &bytes[..4] != FILE_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FILE_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let scheme =
        Scheme::from_code(bytes[6]).ok_or_else(|| bad(format!("unknown scheme {}", bytes[6])))?;
    let count = u32::from_le_bytes([bytes[7], bytes[8], bytes[9], bytes[10]]) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 4 * count {
        return Err(bad(format!(
            "expected {} body bytes for {count} tokens, found {}",
            4 * count,
            body.len()
        )));
    }
    let (tok_bytes, ind_bytes) = body.split_at(2 * count);
    let tokens = tok_bytes
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    let indicators = ind_bytes
        .chunks_exact(2)
        .map(|c| match i16::from_le_bytes([c[0], c[1]]) {
            -1 => Ok(None),
            v if v >= 0 => Ok(Some(v as u16)),
            v => Err(bad(format!("invalid indicator {v}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TokenSequence {
        scheme,
        tokens,
        indicators,
    })
}

/// One `"token indicator"` line per token, `-1` for no indicator.
pub fn token_text_dump(t: &TokenSequence) -> String {
    let mut s = String::with_capacity(t.len() * 8);
    for (tok, ind) in t.tokens.iter().zip(&t.indicators) {
        let ind = ind.map_or(-1, i32::from);
        let _ = writeln!(s, "{tok} {ind}");
    }
    s
}
