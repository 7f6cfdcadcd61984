//! JSON-lines persistence for sweep logs.
//!
//! Line 1 is a header object:
//!   {"format":"materio-log-v1","pin_count":..,"frequency_set":[..],
//!    "seed":..,"config_count":..}
//! Every following line is one record:
//!   {"config":{..},"sample_rate_hz":..,"start_time_s":..,"wall_time_s":..,
//!    "bit_len":..,"bits_rle":".."}
//!
//! `bits_rle` encodes the bit sequence as alternating run lengths in hex,
//! dot-separated, starting with a run of zeros (length 0 when the buffer
//! opens with a one). `bit_len` is the decoded length check.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::substrate::SampleBuffer;
use crate::sweep::{RecordLog, ResponseRecord, StimulusConfig};

pub const LOG_FORMAT: &str = "materio-log-v1";

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    pin_count: usize,
    frequency_set: Vec<f64>,
    seed: u64,
    config_count: usize,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    config: StimulusConfig,
    sample_rate_hz: f64,
    start_time_s: f64,
    wall_time_s: f64,
    bit_len: usize,
    bits_rle: String,
}

/// Run-length encodes bits as dot-separated hex lengths, zeros first.
pub fn bits_to_rle(bits: &[u8]) -> String {
    let mut runs: Vec<usize> = Vec::new();
    let mut current = 0u8;
    let mut run = 0usize;
    for &b in bits {
        if b == current {
            run += 1;
        } else {
            runs.push(run);
            current = b;
            run = 1;
        }
    }
    runs.push(run);
    runs.iter()
        .map(|r| format!("{r:x}"))
        .collect::<Vec<_>>()
        .join(".")
}

/// Inverse of [`bits_to_rle`]; `expected_len` guards truncated lines.
pub fn rle_to_bits(encoded: &str, expected_len: usize) -> Result<Vec<u8>> {
    let mut bits = Vec::with_capacity(expected_len);
    let mut value = 0u8;
    if encoded.is_empty() {
        return Err(Error::invalid("empty run-length string"));
    }
    for chunk in encoded.split('.') {
        let run = usize::from_str_radix(chunk, 16)
            .map_err(|_| Error::invalid(format!("bad run length `{chunk}`")))?;
        bits.extend(std::iter::repeat_n(value, run));
        value = 1 - value;
    }
    if bits.len() != expected_len {
        return Err(Error::invalid(format!(
            "run lengths decode to {} bits, expected {expected_len}",
            bits.len()
        )));
    }
    Ok(bits)
}

pub fn write_log(log: &RecordLog, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let header = Header {
        format: LOG_FORMAT.to_string(),
        pin_count: log.pin_count,
        frequency_set: log.frequency_set.clone(),
        seed: log.seed,
        config_count: log.records.len(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for record in &log.records {
        let line = RecordLine {
            config: record.config.clone(),
            sample_rate_hz: record.buffer.sample_rate_hz,
            start_time_s: record.buffer.start_time_s,
            wall_time_s: record.wall_time_s,
            bit_len: record.buffer.len(),
            bits_rle: bits_to_rle(&record.buffer.bits),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_log(path: &Path) -> Result<RecordLog> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::MalformedLog {
            line: 1,
            msg: "missing header".into(),
        })??;
    let header: Header = serde_json::from_str(&header_line).map_err(|e| Error::MalformedLog {
        line: 1,
        msg: e.to_string(),
    })?;
    if header.format != LOG_FORMAT {
        return Err(Error::MalformedLog {
            line: 1,
            msg: format!("unknown format `{}`", header.format),
        });
    }
    let mut records = Vec::with_capacity(header.config_count);
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        let parsed: RecordLine = serde_json::from_str(&text).map_err(|e| Error::MalformedLog {
            line: line_no,
            msg: e.to_string(),
        })?;
        let bits = rle_to_bits(&parsed.bits_rle, parsed.bit_len).map_err(|e| {
            Error::MalformedLog {
                line: line_no,
                msg: e.to_string(),
            }
        })?;
        records.push(ResponseRecord {
            config: parsed.config,
            buffer: SampleBuffer {
                bits,
                sample_rate_hz: parsed.sample_rate_hz,
                start_time_s: parsed.start_time_s,
            },
            wall_time_s: parsed.wall_time_s,
        });
    }
    if records.len() != header.config_count {
        return Err(Error::MalformedLog {
            line: records.len() + 1,
            msg: format!(
                "header promises {} records, found {}",
                header.config_count,
                records.len()
            ),
        });
    }
    let log = RecordLog {
        records,
        frequency_set: header.frequency_set,
        pin_count: header.pin_count,
        seed: header.seed,
    };
    log.validate()?;
    Ok(log)
}
