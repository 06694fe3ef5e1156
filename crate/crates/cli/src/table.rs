//! Sources and channels from generator specs or plain-text table files.
//!
//! A spec whose text before the first `:` names a built-in generator is
//! expanded in place; anything else is read as a file path.
//!
//! Source generators:
//!   `dsbs:P`     two equiprobable bits that disagree with probability P
//!   `dsbsz:P`    fair hidden bit Z observed by both users through
//!                independent flips of probability P (three variables x,y,z)
//!
//! Channel generators:
//!   `identity:K`      copies a K-ary input
//!   `bsc:P`           flips one bit with probability P
//!   `constant:DIMS`   ignores its input(s), output alphabet of size 1
//!   `forward-x:AxB`   maps input pair (x, y) to x
//!   `forward-y:AxB`   maps input pair (x, y) to y
//!   `joint:AxB`       maps input pair (x, y) to the flat pair index
//!
//! `DIMS` is either one size (`3`) or a pair (`2x2`).
//!
//! Table files: a `#` starts a comment anywhere on a line; blank lines are
//! ignored. The first payload line is a header naming every variable as
//! `NAME:SIZE`, with `->` between inputs and outputs for channels
//! (`X:2 Y:2` is a two-variable source, `X:2 -> U:3` a channel). Every
//! following line is one cell: each variable's index in header order, then
//! a probability. Unlisted cells are zero; listing a cell twice is an
//! error. Sources must sum to 1; each channel row must sum to 1.

use std::path::Path;

use relaykey_core::prob::{dsbs, CondChannel, FiniteJoint};

use crate::errors::CliError;

/// Dense tables larger than this many cells are refused at load time.
const ENTRY_CAP: u128 = 10_000_000;

fn parse_prob(what: &str, raw: &str) -> Result<f64, CliError> {
    raw.parse::<f64>().map_err(|e| CliError::TypeError {
        key: what.to_string(),
        detail: format!("cannot parse `{raw}`: {e}"),
    })
}

/// Parse `K` or `AxB` into a list of sizes.
fn parse_dims(what: &str, raw: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in raw.split('x') {
        let n: usize = part.parse().map_err(|_| CliError::TypeError {
            key: what.to_string(),
            detail: format!("`{raw}` is not a size list like `2` or `2x2`"),
        })?;
        if n == 0 {
            return Err(CliError::TypeError {
                key: what.to_string(),
                detail: "alphabet sizes must be at least 1".into(),
            });
        }
        out.push(n);
    }
    Ok(out)
}

fn parse_dim_pair(what: &str, raw: &str) -> Result<(usize, usize), CliError> {
    let d = parse_dims(what, raw)?;
    if d.len() != 2 {
        return Err(CliError::TypeError {
            key: what.to_string(),
            detail: format!("`{raw}` must name exactly two sizes like `2x2`"),
        });
    }
    Ok((d[0], d[1]))
}

/// Fair hidden bit observed by both users through independent symmetric
/// flips: p(x, y, z) = 1/2 · f(x|z) · f(y|z) with flip probability `p`.
pub fn shared_bit_source(p: f64) -> Result<FiniteJoint, CliError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CliError::Usage(format!("flip probability {p} outside [0, 1]")));
    }
    let mut probs = vec![0.0; 8];
    for x in 0..2usize {
        for y in 0..2usize {
            for z in 0..2usize {
                let fx = if x == z { 1.0 - p } else { p };
                let fy = if y == z { 1.0 - p } else { p };
                probs[(x * 2 + y) * 2 + z] = 0.5 * fx * fy;
            }
        }
    }
    FiniteJoint::new(vec![2, 2, 2], probs).map_err(CliError::from)
}

pub fn load_source(spec: &str) -> Result<FiniteJoint, CliError> {
    if let Some((kind, arg)) = spec.split_once(':') {
        match kind {
            "dsbs" => return dsbs(parse_prob("source", arg)?).map_err(CliError::from),
            "dsbsz" => return shared_bit_source(parse_prob("source", arg)?),
            _ => {}
        }
    }
    let (header, cells) = read_table(Path::new(spec))?;
    if !header.out_sizes.is_empty() {
        return Err(CliError::Malformed {
            path: spec.to_string(),
            line: header.line,
            what: "a source header must not contain `->`".into(),
        });
    }
    let probs = fill_dense(spec, &header.in_sizes, &[], cells)?;
    FiniteJoint::new(header.in_sizes, probs).map_err(CliError::from)
}

pub fn load_channel(spec: &str) -> Result<CondChannel, CliError> {
    if let Some((kind, arg)) = spec.split_once(':') {
        match kind {
            "identity" => {
                let d = parse_dims("ch", arg)?;
                if d.len() != 1 {
                    return Err(CliError::TypeError {
                        key: "ch".into(),
                        detail: "identity takes a single size".into(),
                    });
                }
                return Ok(CondChannel::identity(d[0]));
            }
            "bsc" => return CondChannel::bsc(parse_prob("ch", arg)?).map_err(CliError::from),
            "constant" => {
                let d = parse_dims("ch", arg)?;
                return Ok(CondChannel::constant(d, 1));
            }
            "forward-x" | "forward_x" => {
                let (a, b) = parse_dim_pair("ch", arg)?;
                return CondChannel::from_map(vec![a, b], a, |i| i / b).map_err(CliError::from);
            }
            "forward-y" | "forward_y" => {
                let (a, b) = parse_dim_pair("ch", arg)?;
                return CondChannel::from_map(vec![a, b], b, |i| i % b).map_err(CliError::from);
            }
            "joint" => {
                let (a, b) = parse_dim_pair("ch", arg)?;
                return CondChannel::from_map(vec![a, b], a * b, |i| i).map_err(CliError::from);
            }
            _ => {}
        }
    }
    let (header, cells) = read_table(Path::new(spec))?;
    if header.out_sizes.is_empty() {
        return Err(CliError::Malformed {
            path: spec.to_string(),
            line: header.line,
            what: "a channel header needs `->` between inputs and outputs".into(),
        });
    }
    let rows = fill_dense(spec, &header.in_sizes, &header.out_sizes, cells)?;
    CondChannel::new(header.in_sizes, header.out_sizes, rows).map_err(CliError::from)
}

struct Header {
    in_sizes: Vec<usize>,
    out_sizes: Vec<usize>,
    line: usize,
}

/// One table cell: the indices in header order, the probability, and the
/// source line for diagnostics.
type Cell = (Vec<usize>, f64, usize);

fn read_table(path: &Path) -> Result<(Header, Vec<Cell>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Usage(format!("cannot read table file `{}`: {e}", path.display()))
    })?;
    let shown = path.display().to_string();
    let mut header: Option<Header> = None;
    let mut cells = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        match &header {
            None => header = Some(parse_header(&shown, lineno, line)?),
            Some(h) => {
                let nvars = h.in_sizes.len() + h.out_sizes.len();
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != nvars + 1 {
                    return Err(CliError::Malformed {
                        path: shown,
                        line: lineno,
                        what: format!(
                            "expected {} indices and a probability, found {} fields",
                            nvars,
                            toks.len()
                        ),
                    });
                }
                let mut idx = Vec::with_capacity(nvars);
                for (v, t) in toks[..nvars].iter().enumerate() {
                    let k: usize = t.parse().map_err(|_| CliError::Malformed {
                        path: shown.clone(),
                        line: lineno,
                        what: format!("`{t}` is not an index"),
                    })?;
                    let size = if v < h.in_sizes.len() {
                        h.in_sizes[v]
                    } else {
                        h.out_sizes[v - h.in_sizes.len()]
                    };
                    if k >= size {
                        return Err(CliError::Malformed {
                            path: shown,
                            line: lineno,
                            what: format!("index {k} out of range for variable {v} (size {size})"),
                        });
                    }
                    idx.push(k);
                }
                let p: f64 = toks[nvars].parse().map_err(|_| CliError::Malformed {
                    path: shown.clone(),
                    line: lineno,
                    what: format!("`{}` is not a probability", toks[nvars]),
                })?;
                cells.push((idx, p, lineno));
            }
        }
    }
    let header = header.ok_or_else(|| CliError::Malformed {
        path: shown,
        line: text.lines().count().max(1),
        what: "file has no header line".into(),
    })?;
    Ok((header, cells))
}

fn parse_header(path: &str, lineno: usize, line: &str) -> Result<Header, CliError> {
    let mut in_sizes = Vec::new();
    let mut out_sizes = Vec::new();
    let mut past_arrow = false;
    let mut seen_arrow = false;
    for tok in line.split_whitespace() {
        if tok == "->" {
            if seen_arrow {
                return Err(CliError::Malformed {
                    path: path.to_string(),
                    line: lineno,
                    what: "more than one `->` in header".into(),
                });
            }
            seen_arrow = true;
            past_arrow = true;
            continue;
        }
        let Some((name, size)) = tok.split_once(':') else {
            return Err(CliError::Malformed {
                path: path.to_string(),
                line: lineno,
                what: format!("`{tok}` is not a `NAME:SIZE` variable declaration"),
            });
        };
        let name_ok = !name.is_empty()
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        let size: usize = match size.parse() {
            Ok(s) if s >= 1 && name_ok => s,
            _ => {
                return Err(CliError::Malformed {
                    path: path.to_string(),
                    line: lineno,
                    what: format!("`{tok}` is not a `NAME:SIZE` variable declaration"),
                })
            }
        };
        if past_arrow {
            out_sizes.push(size);
        } else {
            in_sizes.push(size);
        }
    }
    if in_sizes.is_empty() || (seen_arrow && out_sizes.is_empty()) {
        return Err(CliError::Malformed {
            path: path.to_string(),
            line: lineno,
            what: "header declares no variables".into(),
        });
    }
    Ok(Header { in_sizes, out_sizes, line: lineno })
}

/// Scatter sparse cells into a dense table, zero-filling the gaps.
fn fill_dense(
    path: &str,
    in_sizes: &[usize],
    out_sizes: &[usize],
    cells: Vec<Cell>,
) -> Result<Vec<f64>, CliError> {
    let mut total: u128 = 1;
    for &s in in_sizes.iter().chain(out_sizes) {
        total = total.saturating_mul(s as u128);
    }
    if total > ENTRY_CAP {
        return Err(CliError::Usage(format!(
            "table needs {total} cells, more than the {ENTRY_CAP}-cell limit"
        )));
    }
    let mut dense = vec![0.0f64; total as usize];
    let mut filled = vec![false; total as usize];
    let sizes: Vec<usize> = in_sizes.iter().chain(out_sizes).copied().collect();
    for (idx, p, lineno) in cells {
        let mut flat = 0usize;
        for (k, s) in idx.iter().zip(&sizes) {
            flat = flat * s + k;
        }
        if filled[flat] {
            return Err(CliError::Malformed {
                path: path.to_string(),
                line: lineno,
                what: "cell listed twice".into(),
            });
        }
        filled[flat] = true;
        dense[flat] = p;
    }
    Ok(dense)
}
