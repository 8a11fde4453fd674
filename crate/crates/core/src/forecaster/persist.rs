//! Versioned plain-text model files.
//!
//! ```text
//! gridshift-mlp 1
//! lag 24
//! layers 29 25 20 15 1
//! range wind_speed <min> <max>
//! ...                                 (six ranges: weather columns, then load)
//! weights 1 25 29                     (layer index, rows, cols)
//! <row-major values, one row per line>
//! bias 1 <values>
//! ...
//! ```
//!
//! Floats are written in shortest round-trip form, so a load reproduces the
//! saved parameters bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::{Mlp, MlpModel};
use crate::error::{Error, Result};
use crate::ingest::{FeatureRange, NormalizationStats};

const MAGIC: &str = "gridshift-mlp";
const VERSION: u32 = 1;

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

impl MlpModel {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let sizes = self.net.layer_sizes();
        writeln!(s, "{MAGIC} {VERSION}").unwrap();
        writeln!(s, "lag {}", self.lag).unwrap();
        let sizes_text: Vec<String> = sizes.iter().map(usize::to_string).collect();
        writeln!(s, "layers {}", sizes_text.join(" ")).unwrap();
        for r in self.stats.ranges() {
            writeln!(s, "range {} {} {}", r.name, r.min, r.max).unwrap();
        }
        for (k, (w, b)) in self.net.weights().iter().zip(self.net.biases()).enumerate() {
            let (rows, cols) = (sizes[k + 1], sizes[k]);
            writeln!(s, "weights {} {rows} {cols}", k + 1).unwrap();
            for row in w.chunks(cols) {
                writeln!(s, "{}", join(row)).unwrap();
            }
            writeln!(s, "bias {} {}", k + 1, join(b)).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty()).enumerate();
        let mut next = |what: &str| -> Result<(usize, Vec<&str>)> {
            lines
                .next()
                .map(|(i, l)| (i + 1, l.split_whitespace().collect()))
                .ok_or_else(|| {
                    Error::ModelFormat(format!("unexpected end of file, expected {what}"))
                })
        };
        let bad = |line: usize, msg: &str| Error::ModelFormat(format!("line {line}: {msg}"));
        let num = |line: usize, tok: &str| -> Result<f64> {
            tok.parse::<f64>()
                .map_err(|_| bad(line, &format!("bad number `{tok}`")))
        };
        let int = |line: usize, tok: &str| -> Result<usize> {
            tok.parse::<usize>()
                .map_err(|_| bad(line, &format!("bad integer `{tok}`")))
        };

        let (n, head) = next("header")?;
        match head.as_slice() {
            [MAGIC, v] if int(n, v)? as u32 == VERSION => {}
            [MAGIC, v] => return Err(bad(n, &format!("unsupported version {v}"))),
            _ => return Err(bad(n, "not a gridshift model file")),
        }
        let (n, lag_line) = next("lag")?;
        let lag = match lag_line.as_slice() {
            ["lag", v] => int(n, v)?,
            _ => return Err(bad(n, "expected `lag <n>`")),
        };
        let (n, layer_line) = next("layers")?;
        if layer_line.first() != Some(&"layers") {
            return Err(bad(n, "expected `layers ...`"));
        }
        let sizes = layer_line[1..]
            .iter()
            .map(|t| int(n, t))
            .collect::<Result<Vec<_>>>()?;

        let mut ranges = Vec::with_capacity(6);
        for _ in 0..6 {
            let (n, r) = next("range")?;
            match r.as_slice() {
                ["range", name, min, max] => ranges.push(FeatureRange {
                    name: name.to_string(),
                    min: num(n, min)?,
                    max: num(n, max)?,
                }),
                _ => return Err(bad(n, "expected `range <name> <min> <max>`")),
            }
        }
        let load = ranges.pop().unwrap();
        let weather: [FeatureRange; 5] = ranges.try_into().unwrap();

        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for k in 1..sizes.len() {
            let (n, h) = next("weights")?;
            let (rows, cols) = match h.as_slice() {
                ["weights", idx, r, c] if int(n, idx)? == k => (int(n, r)?, int(n, c)?),
                _ => return Err(bad(n, &format!("expected `weights {k} <rows> <cols>`"))),
            };
            if rows != sizes[k] || cols != sizes[k - 1] {
                return Err(bad(n, "weight shape disagrees with `layers`"));
            }
            let mut w = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (n, row) = next("weight row")?;
                if row.len() != cols {
                    return Err(bad(n, &format!("expected {cols} values")));
                }
                for t in row {
                    w.push(num(n, t)?);
                }
            }
            let (n, b) = next("bias")?;
            match b.as_slice() {
                ["bias", idx, vals @ ..] if int(n, idx)? == k && vals.len() == rows => {
                    biases.push(vals.iter().map(|t| num(n, t)).collect::<Result<Vec<_>>>()?)
                }
                _ => return Err(bad(n, &format!("expected `bias {k}` with {rows} values"))),
            }
            weights.push(w);
        }
        if let Ok((n, _)) = next("") {
            return Err(bad(n, "trailing content"));
        }
        let net = Mlp::from_parts(sizes, weights, biases)?;
        if net.input_size() != 5 + lag {
            return Err(Error::ModelFormat(format!(
                "input width {} does not match lag {lag}",
                net.input_size()
            )));
        }
        Ok(Self {
            net,
            stats: NormalizationStats { weather, load },
            lag,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}
