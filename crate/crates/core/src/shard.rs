//! Binary shard files and the byte stream to symbol mapping.
//!
//! Layout: `b"MBR1"`, `u8` version, `u16` node id (1-based), `u16` alpha,
//! `u16` symbol bits, all little-endian, followed by `stripes * alpha`
//! symbols of `ceil(symbol_bits / 8)` little-endian bytes each.

use thiserror::Error;

use crate::galois::FieldElem;

pub const MAGIC: &[u8; 4] = b"MBR1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 11;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShardError {
    #[error("bad magic {0:?}, expected \"MBR1\"")]
    BadMagic([u8; 4]),
    #[error("unsupported shard version {0}")]
    Version(u8),
    #[error("shard truncated: {got} bytes, header needs {HEADER_LEN}")]
    Truncated { got: usize },
    #[error("payload of {payload} bytes is not a whole number of {alpha}-symbol stripes at {bytes} bytes per symbol")]
    Payload { payload: usize, alpha: usize, bytes: usize },
    #[error("symbol width {0} outside 1..=64")]
    SymbolBits(u16),
    #[error("node id 0 is invalid; ids are 1-based")]
    NodeId,
    #[error("symbol {value:#x} exceeds {bits} bits")]
    SymbolRange { value: u64, bits: u16 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShardHeader {
    pub node_id: u16,
    pub alpha: u16,
    pub symbol_bits: u16,
}

impl ShardHeader {
    pub fn symbol_bytes(&self) -> usize {
        (self.symbol_bits as usize).div_ceil(8)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shard {
    pub header: ShardHeader,
    /// Stripe-major: `alpha` symbols of stripe 0, then stripe 1, ...
    pub symbols: Vec<FieldElem>,
}

impl Shard {
    pub fn stripes(&self) -> usize {
        if self.header.alpha == 0 {
            0
        } else {
            self.symbols.len() / self.header.alpha as usize
        }
    }

    pub fn stripe(&self, s: usize) -> &[FieldElem] {
        let a = self.header.alpha as usize;
        &self.symbols[s * a..(s + 1) * a]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let width = h.symbol_bytes();
        let mut out = Vec::with_capacity(HEADER_LEN + self.symbols.len() * width);
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&h.node_id.to_le_bytes());
        out.extend_from_slice(&h.alpha.to_le_bytes());
        out.extend_from_slice(&h.symbol_bits.to_le_bytes());
        for s in &self.symbols {
            out.extend_from_slice(&s.raw().to_le_bytes()[..width]);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ShardError> {
        if bytes.len() < HEADER_LEN {
            return Err(ShardError::Truncated { got: bytes.len() });
        }
        let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
        if &magic != MAGIC {
            return Err(ShardError::BadMagic(magic));
        }
        if bytes[4] != VERSION {
            return Err(ShardError::Version(bytes[4]));
        }
        let word = |at: usize| u16::from_le_bytes([bytes[at], bytes[at + 1]]);
        let header = ShardHeader { node_id: word(5), alpha: word(7), symbol_bits: word(9) };
        if header.node_id == 0 {
            return Err(ShardError::NodeId);
        }
        if !(1..=64).contains(&header.symbol_bits) {
            return Err(ShardError::SymbolBits(header.symbol_bits));
        }
        let width = header.symbol_bytes();
        let payload = &bytes[HEADER_LEN..];
        let stripe_bytes = width * header.alpha as usize;
        if stripe_bytes == 0 || !payload.len().is_multiple_of(stripe_bytes) {
            return Err(ShardError::Payload { payload: payload.len(), alpha: header.alpha as usize, bytes: width });
        }
        let symbols = payload
            .chunks_exact(width)
            .map(|c| {
                let mut buf = [0u8; 8];
                buf[..width].copy_from_slice(c);
                let value = u64::from_le_bytes(buf);
                if header.symbol_bits < 64 && value >> header.symbol_bits != 0 {
                    return Err(ShardError::SymbolRange { value, bits: header.symbol_bits });
                }
                Ok(FieldElem(value))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Shard { header, symbols })
    }
}

/// Splits `data` into `bits`-wide symbols, least significant bit first.
/// The last symbol is zero-padded.
pub fn bytes_to_symbols(data: &[u8], bits: u32) -> Vec<FieldElem> {
    assert!((1..=64).contains(&bits));
    let total = data.len() * 8;
    let count = total.div_ceil(bits as usize);
    (0..count)
        .map(|s| {
            let start = s * bits as usize;
            let mut v = 0u64;
            for b in 0..bits as usize {
                let pos = start + b;
                if pos >= total {
                    break;
                }
                let bit = (data[pos / 8] >> (pos % 8)) & 1;
                v |= (bit as u64) << b;
            }
            FieldElem(v)
        })
        .collect()
}

/// Inverse of [`bytes_to_symbols`], truncated to `len` bytes.
pub fn symbols_to_bytes(symbols: &[FieldElem], bits: u32, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    for pos in 0..len * 8 {
        let (s, b) = (pos / bits as usize, pos % bits as usize);
        let bit = symbols.get(s).map_or(0, |e| (e.raw() >> b) & 1) as u8;
        out[pos / 8] |= bit << (pos % 8);
    }
    out
}
