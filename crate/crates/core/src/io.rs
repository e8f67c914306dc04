//! Text formats: `phasegrid v1` grids, tomogram CSV and frame lists.
//!
//! Numbers are written with the shortest representation that reads back to
//! the same `f64`, so writing is deterministic and round trips are exact.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{GridKind, PhaseGrid, Window};
use crate::model::Frame;
use crate::num::Real;
use crate::tomography::{Marginal, Tomogram};

pub const PHASEGRID_HEADER: &str = "# phasegrid v1";
pub const TOMOGRAM_HEADER: &str = "mu,nu,x,value";

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn number<T: Real>(tok: &str, line: usize) -> Result<T> {
    let v: f64 = tok.trim().parse().map_err(|_| parse_err(line, format!("not a number: {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {tok:?}")));
    }
    Ok(T::of(v))
}

fn count(tok: &str, line: usize) -> Result<usize> {
    tok.trim().parse().map_err(|_| parse_err(line, format!("not a sample count: {tok:?}")))
}

/// Parses a `phasegrid v1` file: header line, `q_min q_max n_q`,
/// `p_min p_max n_p`, then `n_q` rows of `n_p` values (`q` slow).
pub fn read_phasegrid<T: Real>(text: &str, kind: GridKind) -> Result<PhaseGrid<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, l)) if l == PHASEGRID_HEADER => {}
        _ => return Err(parse_err(1, format!("expected {PHASEGRID_HEADER:?}"))),
    }
    let mut range = |axis: &str| -> Result<(T, T, usize)> {
        let (n, l) = lines.next().ok_or_else(|| parse_err(0, format!("missing {axis} range line")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(n, format!("expected `{axis}_min {axis}_max n_{axis}`")));
        }
        Ok((number(toks[0], n)?, number(toks[1], n)?, count(toks[2], n)?))
    };
    let (q_min, q_max, n_q) = range("q")?;
    let (p_min, p_max, n_p) = range("p")?;
    let window = Window::new(q_min, q_max, n_q, p_min, p_max, n_p).map_err(|e| parse_err(2, e.to_string()))?;
    let mut values = Vec::with_capacity(window.len());
    let mut rows = 0;
    for (n, l) in lines {
        if l.is_empty() {
            continue;
        }
        let row = l.split_whitespace().map(|t| number::<T>(t, n)).collect::<Result<Vec<_>>>()?;
        if row.len() != n_p {
            return Err(parse_err(n, format!("expected {n_p} values, found {}", row.len())));
        }
        rows += 1;
        if rows > n_q {
            return Err(parse_err(n, format!("more than {n_q} rows")));
        }
        values.extend(row);
    }
    if rows != n_q {
        return Err(parse_err(text.lines().count(), format!("expected {n_q} rows, found {rows}")));
    }
    PhaseGrid::new(window, kind, values)
}

pub fn write_phasegrid<T: Real>(g: &PhaseGrid<T>) -> String {
    let w = g.window();
    let mut s = String::new();
    let _ = writeln!(s, "{PHASEGRID_HEADER}");
    let _ = writeln!(s, "{} {} {}", fmt_f64(w.q_min.as_f64()), fmt_f64(w.q_max.as_f64()), w.n_q);
    let _ = writeln!(s, "{} {} {}", fmt_f64(w.p_min.as_f64()), fmt_f64(w.p_max.as_f64()), w.n_p);
    for i in 0..w.n_q {
        let row: Vec<String> = (0..w.n_p).map(|j| fmt_f64(g.value(i, j).as_f64())).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

/// Writes sampled marginals, one contiguous block of rows per frame.
pub fn write_tomogram_csv<T: Real>(t: &Tomogram<T>) -> Result<String> {
    if let Tomogram::Gaussian(_) = t {
        return Err(Error::Domain("only sampled tomograms have a CSV form".into()));
    }
    let mut s = String::new();
    let _ = writeln!(s, "{TOMOGRAM_HEADER}");
    for m in t.marginals() {
        let f = m.frame();
        for (k, v) in m.values().iter().enumerate() {
            let row = [f.mu, f.nu, m.x(k), *v].map(|x| fmt_f64(x.as_f64()));
            let _ = writeln!(s, "{}", row.join(","));
        }
    }
    Ok(s)
}

/// Reads a tomogram CSV. Rows of one frame must be contiguous with uniformly
/// spaced `x`.
pub fn read_tomogram_csv<T: Real>(text: &str) -> Result<Tomogram<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, l)) if l.replace(' ', "") == TOMOGRAM_HEADER => {}
        _ => return Err(parse_err(1, format!("expected header {TOMOGRAM_HEADER:?}"))),
    }
    struct Block<T> {
        mu: T,
        nu: T,
        first_line: usize,
        xs: Vec<T>,
        vs: Vec<T>,
    }
    let mut blocks: Vec<Block<T>> = Vec::new();
    for (n, l) in lines {
        if l.is_empty() {
            continue;
        }
        let toks: Vec<&str> = l.split(',').collect();
        if toks.len() != 4 {
            return Err(parse_err(n, "expected four comma-separated fields"));
        }
        let (mu, nu, x, v) = (number::<T>(toks[0], n)?, number(toks[1], n)?, number(toks[2], n)?, number(toks[3], n)?);
        match blocks.last_mut() {
            Some(b) if b.mu == mu && b.nu == nu => {
                b.xs.push(x);
                b.vs.push(v);
            }
            _ => {
                if blocks.iter().any(|b| b.mu == mu && b.nu == nu) {
                    return Err(parse_err(n, "rows of a frame must be contiguous"));
                }
                blocks.push(Block { mu, nu, first_line: n, xs: vec![x], vs: vec![v] });
            }
        }
    }
    if blocks.is_empty() {
        return Err(parse_err(1, "no data rows"));
    }
    let mut marginals = Vec::with_capacity(blocks.len());
    for b in blocks {
        let frame = Frame::new(b.mu, b.nu).map_err(|e| parse_err(b.first_line, e.to_string()))?;
        let k = b.xs.len();
        if k < 2 {
            return Err(parse_err(b.first_line, "a frame needs at least two rows"));
        }
        let (lo, hi) = (b.xs[0], b.xs[k - 1]);
        let h = (hi - lo) / T::of_usize(k - 1);
        for (i, x) in b.xs.iter().enumerate() {
            if (*x - (lo + h * T::of_usize(i))).abs() > T::of(1e-9) * (T::one() + h.abs()) {
                return Err(parse_err(b.first_line + i, "x values of a frame must be uniformly spaced"));
            }
        }
        marginals.push(Marginal::new(frame, lo, hi, b.vs).map_err(|e| parse_err(b.first_line, e.to_string()))?);
    }
    Tomogram::sampled(marginals)
}

/// Parses a frame list: one `mu nu` pair per line; blank lines and lines
/// starting with `#` are skipped.
pub fn parse_frames<T: Real>(text: &str) -> Result<Vec<Frame<T>>> {
    let mut frames = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = l.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
        if toks.len() != 2 {
            return Err(parse_err(n, "expected `mu nu`"));
        }
        let f = Frame::new(number(toks[0], n)?, number(toks[1], n)?).map_err(|e| parse_err(n, e.to_string()))?;
        frames.push(f);
    }
    if frames.is_empty() {
        return Err(parse_err(0, "no frames listed"));
    }
    Ok(frames)
}
