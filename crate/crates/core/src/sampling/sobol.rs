//! Sobol low-discrepancy sequence from a direction-number table.
//!
//! Direction numbers follow the Joe-Kuo convention; see
//! `data/sobol_directions.txt` for the file format. Points are generated in
//! the same order as the classical Gray-code generator but with random
//! access: the point at sequence index `i` is the XOR of the direction
//! numbers selected by the bits of `i ^ (i >> 1)`. Index 0 (the all-zeros
//! point) is never emitted; a skip of `k` starts the stream at index `k + 1`,
//! so the first returned point is `(0.5, ..., 0.5)` when `k = 0`.

use crate::error::{Error, Result};

const BITS: usize = 32;

/// Parsed direction-number table; row `j` drives dimension `j + 2`
/// (dimension 1 is the built-in van der Corput sequence).
#[derive(Debug, Clone)]
pub struct SobolTable {
    directions: Vec<[u32; BITS]>,
}

impl SobolTable {
    /// Parse the plain-text table format (`d s a m_1 .. m_s` per line).
    pub fn parse(text: &str) -> Result<Self> {
        let mut directions = vec![first_dimension()];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<u64> = line
                .split_whitespace()
                .map(|f| {
                    f.parse::<u64>().map_err(|_| {
                        Error::InvalidParameter(format!(
                            "sobol table line {}: bad field {f:?}",
                            lineno + 1
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            if fields.len() < 4 {
                return Err(Error::InvalidParameter(format!(
                    "sobol table line {}: expected `d s a m_1..m_s`",
                    lineno + 1
                )));
            }
            let (d, s, a) = (fields[0], fields[1] as usize, fields[2] as u32);
            let m = &fields[3..];
            if d as usize != directions.len() + 1 {
                return Err(Error::InvalidParameter(format!(
                    "sobol table line {}: dimension {d} out of order",
                    lineno + 1
                )));
            }
            if m.len() != s {
                return Err(Error::InvalidParameter(format!(
                    "sobol table line {}: expected {s} direction integers, got {}",
                    lineno + 1,
                    m.len()
                )));
            }
            for (i, &mi) in m.iter().enumerate() {
                if mi % 2 == 0 || mi >= (1 << (i + 1)) {
                    return Err(Error::InvalidParameter(format!(
                        "sobol table line {}: m_{} = {mi} must be odd and < 2^{}",
                        lineno + 1,
                        i + 1,
                        i + 1
                    )));
                }
            }
            directions.push(expand_directions(s, a, m));
        }
        Ok(SobolTable { directions })
    }

    /// Table embedded from `data/sobol_directions.txt`.
    pub fn embedded() -> Self {
        Self::parse(include_str!(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../data/sobol_directions.txt"
        )))
        .expect("embedded sobol table is valid")
    }

    /// Highest supported dimension.
    pub fn max_dim(&self) -> usize {
        self.directions.len()
    }

    /// Uniform `(0,1)^dim` points at sequence indices `skip+1 ..= skip+n`.
    pub fn uniform(&self, dim: usize, n: usize, skip: u64) -> Result<Vec<Vec<f64>>> {
        if dim == 0 || dim > self.max_dim() {
            return Err(Error::SobolDimension { dim, max: self.max_dim() });
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..n as u64 {
            let index = skip + i + 1;
            let gray = index ^ (index >> 1);
            let mut point = Vec::with_capacity(dim);
            for v in &self.directions[..dim] {
                let mut x = 0u32;
                let mut bits = gray;
                let mut j = 0;
                while bits != 0 && j < BITS {
                    if bits & 1 == 1 {
                        x ^= v[j];
                    }
                    bits >>= 1;
                    j += 1;
                }
                point.push(x as f64 / (1u64 << BITS) as f64);
            }
            out.push(point);
        }
        Ok(out)
    }
}

fn first_dimension() -> [u32; BITS] {
    let mut v = [0u32; BITS];
    for (k, vk) in v.iter_mut().enumerate() {
        *vk = 1 << (BITS - 1 - k);
    }
    v
}

/// Joe-Kuo recurrence for the full 32-bit direction numbers of one dimension.
fn expand_directions(s: usize, a: u32, m: &[u64]) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    for k in 0..s.min(BITS) {
        v[k] = (m[k] as u32) << (BITS - 1 - k);
    }
    for k in s..BITS {
        let prev = v[k - s];
        let mut vk = prev ^ (prev >> s);
        for i in 1..s {
            if (a >> (s - 1 - i)) & 1 == 1 {
                vk ^= v[k - i];
            }
        }
        v[k] = vk;
    }
    v
}
