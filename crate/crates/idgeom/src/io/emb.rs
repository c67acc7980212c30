//! The binary embedding container.
//!
//! A file is a sequence of records. Each record:
//!
//! ```text
//! magic "EMB1" | rows: u32 LE | cols: u32 LE | dtype: u8 | reserved: u8 x 3 | payload
//! ```
//!
//! dtype 0 is 32-bit float, dtype 1 is 64-bit float; the payload is
//! row-major, little-endian, rows x cols values. Reserved bytes must be
//! zero. Write-then-read round-trips matrices bit-exactly.

use std::io::{Read, Write};

use ndarray::Array2;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"EMB1";
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    fn code(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::F64),
            other => Err(Error::Parse(format!("unknown dtype code {other}"))),
        }
    }

    fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

/// One parsed record: the matrix (widened to f64) and the stored dtype.
#[derive(Debug, Clone)]
pub struct EmbRecord {
    pub data: Array2<f64>,
    pub dtype: Dtype,
}

/// Parse every record in the byte slice. Errors on the first malformed
/// record; trailing bytes that do not start a record are an error.
pub fn parse_records(bytes: &[u8]) -> Result<Vec<EmbRecord>> {
    let mut records = Vec::new();
    let mut rest = bytes;
    while !rest.is_empty() {
        let (record, consumed) = parse_one(rest)?;
        records.push(record);
        rest = &rest[consumed..];
    }
    Ok(records)
}

fn parse_one(bytes: &[u8]) -> Result<(EmbRecord, usize)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Parse(format!(
            "truncated header: {} of {HEADER_LEN} bytes",
            bytes.len()
        )));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::Parse("bad magic; expected EMB1".into()));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let dtype = Dtype::from_code(bytes[12])?;
    if bytes[13..16] != [0, 0, 0] {
        return Err(Error::Parse("reserved header bytes must be zero".into()));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::Parse(format!("empty matrix shape {rows}x{cols}")));
    }
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Parse("matrix shape overflows".into()))?;
    let payload_len = count
        .checked_mul(dtype.size())
        .ok_or_else(|| Error::Parse("payload size overflows".into()))?;
    let total = HEADER_LEN
        .checked_add(payload_len)
        .ok_or_else(|| Error::Parse("record size overflows".into()))?;
    if bytes.len() < total {
        return Err(Error::Parse(format!(
            "truncated payload: {} of {payload_len} bytes",
            bytes.len() - HEADER_LEN
        )));
    }
    let payload = &bytes[HEADER_LEN..total];
    let mut values = Vec::with_capacity(count);
    match dtype {
        Dtype::F32 => {
            for chunk in payload.chunks_exact(4) {
                values.push(f64::from(f32::from_le_bytes(chunk.try_into().unwrap())));
            }
        }
        Dtype::F64 => {
            for chunk in payload.chunks_exact(8) {
                values.push(f64::from_le_bytes(chunk.try_into().unwrap()));
            }
        }
    }
    let data = Array2::from_shape_vec((rows, cols), values)
        .expect("length checked against shape");
    Ok((EmbRecord { data, dtype }, total))
}

/// Read everything from the reader and parse it.
pub fn read_records(mut reader: impl Read) -> Result<Vec<EmbRecord>> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    parse_records(&bytes)
}

/// Append one record. f64 payloads are written bit-exactly; f32 narrows.
pub fn write_record(mut writer: impl Write, data: &Array2<f64>, dtype: Dtype) -> Result<()> {
    let (rows, cols) = data.dim();
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("refusing to write empty matrix".into()));
    }
    if rows > u32::MAX as usize || cols > u32::MAX as usize {
        return Err(Error::InvalidArgument("matrix too large for format".into()));
    }
    writer.write_all(&MAGIC)?;
    writer.write_all(&(rows as u32).to_le_bytes())?;
    writer.write_all(&(cols as u32).to_le_bytes())?;
    writer.write_all(&[dtype.code(), 0, 0, 0])?;
    match dtype {
        Dtype::F32 => {
            for v in data.iter() {
                writer.write_all(&(*v as f32).to_le_bytes())?;
            }
        }
        Dtype::F64 => {
            for v in data.iter() {
                writer.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn write_records(mut writer: impl Write, records: &[(&Array2<f64>, Dtype)]) -> Result<()> {
    for (data, dtype) in records {
        write_record(&mut writer, data, *dtype)?;
    }
    Ok(())
}
