//! Fan and K-class file formats used by the CLI.
//!
//! Fans are described in JSON or TOML with 1-based indices:
//!
//! ```json
//! {
//!   "rank": 3,
//!   "points": [[1,0,1],[0,1,1],[-1,-1,1],[0,0,1]],
//!   "max_cones": [[1,2,4],[1,3,4],[2,3,4]],
//!   "psi": ["0","0","0","-1"]
//! }
//! ```
//!
//! K-classes are JSON sums of monomials in the line bundles R_i, optionally
//! multiplied by a compact-support generator named by its (1-based) ray set:
//! `{"terms": [{"coef": 1, "exps": [0,0,0,0], "G": [4]}]}`.

use serde::Deserialize;
use std::path::Path;
use std::str::FromStr;

use crate::arith::{Q, Z};
use crate::ktheory::{KClass, KTerm};
use crate::lattice::{LatticePoint, StackyFan, StackyFanData};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid fan: {0}")]
    Validation(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FanFile {
    rank: usize,
    points: Vec<Vec<i64>>,
    /// 1-based ray indices per maximal cone.
    max_cones: Vec<Vec<usize>>,
    /// Rational values "p/q" (or plain integers) per ray.
    psi: Vec<String>,
}

fn parse_rational(s: &str) -> Result<Q, IoError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = Z::from_str(num)
        .map_err(|_| IoError::Parse(format!("bad rational numerator in psi: {s:?}")))?;
    let d = Z::from_str(den)
        .map_err(|_| IoError::Parse(format!("bad rational denominator in psi: {s:?}")))?;
    if d == Z::from(0) {
        return Err(IoError::Parse(format!("zero denominator in psi: {s:?}")));
    }
    Ok(Q::new(n, d))
}

fn one_based(ix: &[usize], n: usize, what: &str) -> Result<Vec<usize>, IoError> {
    ix.iter()
        .map(|&i| {
            if i == 0 || i > n {
                Err(IoError::Parse(format!(
                    "{what}: index {i} out of range 1..={n}"
                )))
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

/// Parse a fan description; the format is sniffed (JSON when the text
/// starts with '{', TOML otherwise).
pub fn parse_fan_str(text: &str) -> Result<StackyFan, IoError> {
    let file: FanFile = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?
    } else {
        toml::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?
    };
    let n = file.points.len();
    if file.psi.len() != n {
        return Err(IoError::Parse(format!(
            "psi has {} entries but there are {} points",
            file.psi.len(),
            n
        )));
    }
    let points: Vec<LatticePoint> = file
        .points
        .iter()
        .map(|p| {
            if p.len() != file.rank {
                Err(IoError::Parse(format!(
                    "point {p:?} has {} coordinates, expected rank {}",
                    p.len(),
                    file.rank
                )))
            } else {
                Ok(LatticePoint::from_i64(p))
            }
        })
        .collect::<Result<_, _>>()?;
    let max_cones = file
        .max_cones
        .iter()
        .map(|c| one_based(c, n, "max_cones"))
        .collect::<Result<_, _>>()?;
    let psi = file
        .psi
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<_, _>>()?;
    let data = StackyFanData {
        rank: file.rank,
        points,
        max_cones,
        psi,
    };
    StackyFan::new(data).map_err(|report| {
        let msgs: Vec<String> = report
            .failures
            .iter()
            .map(|f| format!("{}: {}", f.kind, f.witness))
            .collect();
        IoError::Validation(msgs.join("; "))
    })
}

pub fn load_fan(path: &Path) -> Result<StackyFan, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_fan_str(&text)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KTermFile {
    coef: i64,
    exps: Vec<i64>,
    #[serde(rename = "G", default)]
    g: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KFile {
    terms: Vec<KTermFile>,
}

/// Parse a K-class (JSON); generator ray sets are 1-based in the file.
pub fn parse_kclass_str(text: &str, n_points: usize) -> Result<KClass, IoError> {
    let file: KFile = serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
    let terms = file
        .terms
        .into_iter()
        .map(|t| {
            if t.exps.len() != n_points {
                return Err(IoError::Parse(format!(
                    "term has {} exponents but the fan has {} points",
                    t.exps.len(),
                    n_points
                )));
            }
            let g = match t.g {
                None => None,
                Some(ix) => {
                    let mut zero_based = one_based(&ix, n_points, "G")?;
                    zero_based.sort_unstable();
                    Some(zero_based)
                }
            };
            Ok(KTerm {
                coef: t.coef,
                exps: t.exps,
                g,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(KClass { terms })
}

pub fn load_kclass(path: &Path, n_points: usize) -> Result<KClass, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_kclass_str(&text, n_points)
}
