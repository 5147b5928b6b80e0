//! Text formats for signals, matrices, threshold banks, and sign data.
//!
//! Complex samples are written one per line as `re im` with `.` as the
//! decimal separator. Multi-bank threshold files separate banks with a blank
//! line. All files are UTF-8 with LF line endings.

use std::path::Path;

use crate::error::{RadarError, Result};
use crate::sampling::OneBitChannel;
use crate::{C64, CMatrix, CVector};

/// One complex sample per line, `re im`.
pub fn signal_to_string(v: &CVector) -> String {
    let mut out = String::new();
    for z in v.iter() {
        out.push_str(&format!("{} {}\n", z.re, z.im));
    }
    out
}

pub fn signal_from_str(text: &str) -> Result<CVector> {
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        samples.push(parse_complex(line, lineno + 1)?);
    }
    if samples.is_empty() {
        return Err(RadarError::InvalidArgument("signal file has no samples".into()));
    }
    Ok(CVector::from_vec(samples))
}

fn parse_complex(line: &str, lineno: usize) -> Result<C64> {
    let mut parts = line.split_whitespace();
    let (re, im) = match (parts.next(), parts.next(), parts.next()) {
        (Some(re), Some(im), None) => (re, im),
        _ => {
            return Err(RadarError::InvalidArgument(format!(
                "line {lineno}: expected 're im', got '{line}'"
            )))
        }
    };
    let re: f64 = re.parse().map_err(|_| {
        RadarError::InvalidArgument(format!("line {lineno}: bad real part '{re}'"))
    })?;
    let im: f64 = im.parse().map_err(|_| {
        RadarError::InvalidArgument(format!("line {lineno}: bad imaginary part '{im}'"))
    })?;
    Ok(C64::new(re, im))
}

pub fn write_signal(path: &Path, v: &CVector) -> Result<()> {
    std::fs::write(path, signal_to_string(v))?;
    Ok(())
}

pub fn read_signal(path: &Path) -> Result<CVector> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RadarError::Usage(format!("cannot read {}: {e}", path.display())))?;
    signal_from_str(&text)
}

/// Debug matrix export: row-major CSV, `re im` pairs per cell, cells joined
/// with ';'.
pub fn matrix_to_string(m: &CMatrix) -> String {
    let mut out = String::new();
    for a in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|b| format!("{} {}", m[(a, b)].re, m[(a, b)].im))
            .collect();
        out.push_str(&row.join(";"));
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    std::fs::write(path, matrix_to_string(m))?;
    Ok(())
}

/// Threshold banks: each bank in the `re im` signal format, banks separated
/// by one blank line.
pub fn banks_to_string(banks: &[CVector]) -> String {
    banks
        .iter()
        .map(signal_to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn banks_from_str(text: &str) -> Result<Vec<CVector>> {
    let mut banks = Vec::new();
    for chunk in text.split("\n\n") {
        if chunk.trim().is_empty() {
            continue;
        }
        banks.push(signal_from_str(chunk)?);
    }
    if banks.is_empty() {
        return Err(RadarError::InvalidArgument("threshold file has no banks".into()));
    }
    Ok(banks)
}

pub fn write_banks(path: &Path, banks: &[CVector]) -> Result<()> {
    std::fs::write(path, banks_to_string(banks))?;
    Ok(())
}

pub fn read_banks(path: &Path) -> Result<Vec<CVector>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RadarError::Usage(format!("cannot read {}: {e}", path.display())))?;
    banks_from_str(&text)
}

/// Comparator signs: per line `gr gi` in {-1, 1}; multiple channels are
/// separated by one blank line, mirroring the threshold-bank format.
pub fn signs_to_string(channels: &[OneBitChannel]) -> String {
    channels
        .iter()
        .map(|ch| {
            let mut s = String::new();
            for (gr, gi) in ch.gamma_r.iter().zip(&ch.gamma_i) {
                s.push_str(&format!("{gr} {gi}\n"));
            }
            s
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn signs_from_str(text: &str) -> Result<Vec<OneBitChannel>> {
    let mut channels = Vec::new();
    for chunk in text.split("\n\n") {
        if chunk.trim().is_empty() {
            continue;
        }
        let mut gamma_r = Vec::new();
        let mut gamma_i = Vec::new();
        for (lineno, line) in chunk.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let z = parse_complex(line, lineno + 1)?;
            let to_sign = |v: f64| -> Result<i8> {
                if v == 1.0 || v == -1.0 {
                    Ok(v as i8)
                } else {
                    Err(RadarError::InvalidArgument(format!(
                        "line {}: sign entries must be 1 or -1, got {v}",
                        lineno + 1
                    )))
                }
            };
            gamma_r.push(to_sign(z.re)?);
            gamma_i.push(to_sign(z.im)?);
        }
        channels.push(OneBitChannel { gamma_r, gamma_i });
    }
    if channels.is_empty() {
        return Err(RadarError::InvalidArgument("sign file has no channels".into()));
    }
    Ok(channels)
}

pub fn write_signs(path: &Path, channels: &[OneBitChannel]) -> Result<()> {
    std::fs::write(path, signs_to_string(channels))?;
    Ok(())
}

pub fn read_signs(path: &Path) -> Result<Vec<OneBitChannel>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RadarError::Usage(format!("cannot read {}: {e}", path.display())))?;
    signs_from_str(&text)
}
