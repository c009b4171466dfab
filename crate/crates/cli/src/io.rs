use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use vpb_core::diagram::{self, CoordFormat, DiagramSet, EssentialPolicy, PersistenceDiagram};

/// Where data goes: a file, or stdout.
pub struct Sink {
    pub out: Option<PathBuf>,
    pub stdout: bool,
}

impl Sink {
    pub fn emit(&self, data: &str) -> Result<()> {
        match (&self.out, self.stdout) {
            (Some(p), false) => {
                std::fs::write(p, data).with_context(|| format!("cannot write {}", p.display()))?;
                eprintln!("wrote {}", p.display());
            }
            (Some(p), true) => {
                std::fs::write(p, data).with_context(|| format!("cannot write {}", p.display()))?;
                print!("{data}");
            }
            (None, _) => print!("{data}"),
        }
        Ok(())
    }
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Coordinate convention named by a header row, if any.
fn header_format(text: &str) -> Option<CoordFormat> {
    let first = text.lines().find(|l| !l.trim().is_empty())?;
    let cols: Vec<String> = first.split(',').map(|s| s.trim().to_ascii_lowercase()).collect();
    match (cols.first().map(String::as_str), cols.get(2).map(String::as_str)) {
        (Some("dim"), Some("death")) => Some(CoordFormat::BirthDeath),
        (Some("dim"), Some("persistence")) => Some(CoordFormat::BirthPersistence),
        _ => None,
    }
}

/// Reads a diagram file: JSON by extension, otherwise CSV whose convention
/// comes from `format`, then the header, then birth-death.
pub fn read_diagrams(path: &Path, format: Option<CoordFormat>, essential: EssentialPolicy) -> Result<DiagramSet> {
    let text = read(path)?;
    let set = if path.extension().is_some_and(|e| e == "json") {
        diagram::from_json(&text)?
    } else {
        let f = format.or_else(|| header_format(&text)).unwrap_or(CoordFormat::BirthDeath);
        diagram::parse_diagram_str(&text, f, essential).with_context(|| format!("in {}", path.display()))?
    };
    Ok(set)
}

/// The diagram of dimension `dim` (empty when absent), or the only
/// dimension present when `dim` is `None`.
pub fn pick_dim(set: &DiagramSet, dim: Option<usize>, path: &Path) -> Result<PersistenceDiagram> {
    match dim {
        Some(d) => Ok(set.get(&d).cloned().unwrap_or_else(|| PersistenceDiagram::empty(d))),
        None => match set.len() {
            0 => Ok(PersistenceDiagram::empty(1)),
            1 => Ok(set.values().next().cloned().expect("one entry")),
            _ => bail!("{} holds several dimensions; choose one with --dim", path.display()),
        },
    }
}

/// One label per non-empty line; an optional first line `label` is a
/// header. Labels map to indices in order of first appearance.
pub fn read_labels(path: &Path) -> Result<(Vec<usize>, Vec<String>)> {
    let text = read(path)?;
    let mut names: Vec<String> = Vec::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().map(str::trim).filter(|l| !l.is_empty()).enumerate() {
        if i == 0 && line.eq_ignore_ascii_case("label") {
            continue;
        }
        let idx = match names.iter().position(|n| n == line) {
            Some(k) => k,
            None => {
                names.push(line.to_string());
                names.len() - 1
            }
        };
        out.push(idx);
    }
    Ok((out, names))
}

/// `6x6` or `6`.
pub fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad grid size `{s}` (expected NxM)"));
    let (nx, ny) = match s.split_once(['x', 'X']) {
        Some((a, b)) => (parse(a)?, parse(b)?),
        None => {
            let n = parse(s)?;
            (n, n)
        }
    };
    if nx == 0 || ny == 0 {
        return Err("grid sizes must be positive".into());
    }
    Ok((nx, ny))
}

/// `a,b,...` of any parseable type.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<T>().map_err(|_| format!("bad list entry `{t}`")))
        .collect()
}

/// `x0,x1,y0,y1`.
pub fn parse_rect(s: &str) -> std::result::Result<vpb_core::diagram::Rect, String> {
    let v: Vec<f64> = parse_list(s)?;
    match v[..] {
        [x0, x1, y0, y1] if x1 > x0 && y1 > y0 => Ok(vpb_core::diagram::Rect::new(x0, x1, y0, y1)),
        _ => Err(format!("bad region `{s}` (expected x0,x1,y0,y1 with x0<x1, y0<y1)")),
    }
}
