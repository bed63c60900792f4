//! CSV and plain-text serialization.
//!
//! Numbers are printed with 12 significant digits, `.` as the decimal mark
//! and no locale, so identical runs give byte-identical files.

use crate::cocycle::DirectionWitness;
use crate::entropy::EntropyEstimate;
use crate::hitting::{HittingCertificate, HittingOutcome, Refutation};
use crate::irregular::{BirkhoffTrace, Checkpoint, IrregularWitness};
use crate::spaces::{FiniteWord, Point};
use std::fmt::Write as _;

/// `x` with 12 significant digits in the shortest of fixed or exponent form.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn trim(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

pub fn fmt_point(p: &Point) -> String {
    match p {
        Point::Symbolic(w) => format!("[{}]...", w.take(12)),
        other => {
            let c: Vec<String> = other.coords().iter().map(|x| fmt_num(*x)).collect();
            format!("({})", c.join(" "))
        }
    }
}

/// One CSV cell.
#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.into())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// A CSV table preceded by `# key = value` lines echoing the run configuration.
#[derive(Clone, Debug, Default)]
pub struct Csv {
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Csv {
    pub fn new(header: &[(String, String)], columns: &[&str]) -> Self {
        Csv { header: header.to_vec(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

/// Columns `step, symbol, average` (steps are 1-based).
pub fn trace_csv(header: &[(String, String)], word: &FiniteWord, trace: &BirkhoffTrace) -> Csv {
    let mut csv = Csv::new(header, &["step", "symbol", "average"]);
    for (j, a) in trace.averages.iter().enumerate() {
        let s = word.symbols().get(j).map(|s| s.value()).unwrap_or(0);
        csv.push(vec![(j + 1).into(), s.into(), (*a).into()]);
    }
    csv
}

/// Rows `n`, columns `ε`, values counts; summary lines follow as comments.
pub fn entropy_csv(header: &[(String, String)], e: &EntropyEstimate) -> Csv {
    let mut cols = vec!["n".to_string()];
    cols.extend(e.eps.iter().map(|x| format!("eps={}", fmt_num(*x))));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut csv = Csv::new(header, &col_refs);
    for (i, n) in e.n.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(*n).into()];
        row.extend(e.counts[i].iter().map(|c| Cell::Num(*c)));
        csv.push(row);
    }
    csv
}

pub fn entropy_summary(e: &EntropyEstimate) -> String {
    let j = |v: &[f64]| v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(" ");
    format!(
        "entropy {} = {} slopes [{}] residuals [{}] reliable {}{}",
        e.kind,
        fmt_num(e.value),
        j(&e.slopes),
        j(&e.residuals),
        e.reliable(),
        if e.lower_bound { " (sampled word set: lower bound)" } else { "" }
    )
}

pub fn certificate_text(c: &HittingCertificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "frequent hitting certificate");
    let _ = writeln!(s, "eps = {}", fmt_num(c.eps));
    let _ = writeln!(s, "delta = {}", fmt_num(c.delta));
    let _ = writeln!(s, "seed = {}", c.seed);
    let _ = writeln!(s, "K = {}", c.k);
    let _ = writeln!(s, "base balls = {}", c.b1_centers.len());
    let _ = writeln!(s, "targets = {} centers x {} radii", c.b2_centers.len(), c.b2_radii.len());
    let _ = writeln!(s, "pairs = {}", c.pairs);
    let _ = writeln!(s, "searched nodes = {}", c.searched_nodes);
    let _ = writeln!(s, "table = {}", if c.full_table { "full" } else { "worst pair per base ball" });
    s
}

/// One row per certified pair: `b1, b2, radius, p, word, contained_center, contained_radius`.
pub fn certificate_csv(header: &[(String, String)], c: &HittingCertificate) -> Csv {
    let mut csv = Csv::new(header, &["b1", "b2", "radius", "p", "word", "contained_center", "contained_radius"]);
    for e in &c.entries {
        csv.push(vec![
            e.b1.into(),
            e.b2.into(),
            c.b2_radii[e.radius].into(),
            e.p.into(),
            e.word.to_string().into(),
            fmt_point(&e.contained.center).into(),
            e.contained.radius.into(),
        ]);
    }
    csv
}

pub fn refutation_text(r: &Refutation) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "frequent hitting refutation evidence (advisory: search up to budget)");
    let _ = writeln!(s, "eps = {}", fmt_num(r.eps));
    let _ = writeln!(s, "K_max = {}", r.k_max);
    let _ = writeln!(s, "B1 = {} radius {}", fmt_point(&r.b1.center), fmt_num(r.b1.radius));
    let _ = writeln!(s, "B2 = {} radius {}", fmt_point(&r.b2.center), fmt_num(r.b2.radius));
    let _ = writeln!(s, "required radius = {}", fmt_num(r.required_radius));
    let _ = writeln!(s, "best radius = {}", fmt_num(r.best_radius));
    let _ = writeln!(s, "exhaustive = {}", r.exhaustive);
    if let (Some(k), Some(res)) = (r.decay_slope, r.decay_residual) {
        let _ = writeln!(s, "decay slope = {} (residual {})", fmt_num(k), fmt_num(res));
    }
    let _ = writeln!(s, "p,word,delta,log_radius");
    for d in &r.decay {
        let _ = writeln!(s, "{},{},{},{}", d.p, d.word, fmt_num(d.delta), fmt_num(d.radius.ln()));
    }
    s
}

pub fn hitting_text(o: &HittingOutcome) -> String {
    match o {
        HittingOutcome::Certified(c) => certificate_text(c),
        HittingOutcome::Refuted(r) => refutation_text(r),
    }
}

fn checkpoints_text(s: &mut String, cps: &[Checkpoint]) {
    let _ = writeln!(s, "checkpoints (time, average, bound, side)");
    for c in cps {
        let side = if c.upper { "<=" } else { ">=" };
        let _ = writeln!(s, "{} {} {side} {}", c.time, fmt_num(c.average), fmt_num(c.bound));
    }
}

pub fn witness_text(w: &IrregularWitness) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "irregular witness ({:?} nesting)", w.mode);
    let _ = writeln!(s, "shadowed generator = {}", w.shadowed);
    let _ = writeln!(s, "targets = {} {}", fmt_point(&w.targets[0]), fmt_point(&w.targets[1]));
    let _ = writeln!(s, "values = {} {}", fmt_num(w.values[0]), fmt_num(w.values[1]));
    let _ = writeln!(s, "eps = {}", fmt_num(w.eps));
    let blocks: Vec<String> = w.blocks.iter().map(u64::to_string).collect();
    let _ = writeln!(s, "blocks = {}", blocks.join(" "));
    let tr: Vec<String> = w.transitions.iter().map(|t| t.to_string()).collect();
    let _ = writeln!(s, "transitions = {}", tr.join(" | "));
    let _ = writeln!(s, "word length = {}", w.word.len());
    let _ = writeln!(s, "word = {}", w.word);
    let _ = writeln!(s, "point = {}", fmt_point(&w.point));
    if let Some(b) = w.balls.last() {
        let _ = writeln!(s, "enclosure radius = {}", fmt_num(b.radius));
    }
    let _ = writeln!(s, "certified gap = {}", fmt_num(w.certified_gap));
    if !w.balls.is_empty() {
        let _ = writeln!(s, "balls (level, start, center, radius, target)");
        for b in &w.balls {
            let _ = writeln!(s, "{} {} {} {} {}", b.level, b.start, fmt_point(&b.center), fmt_num(b.radius), b.target);
        }
    }
    if !w.traps.is_empty() {
        let _ = writeln!(s, "traps (target, outer, inner, settle)");
        for t in &w.traps {
            let _ = writeln!(s, "{} {} {} {}", t.target, fmt_num(t.outer), fmt_num(t.inner), t.settle);
        }
    }
    checkpoints_text(&mut s, &w.checkpoints);
    s
}

pub fn direction_text(w: &DirectionWitness) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "irregular direction witness ({:?} plan)", w.plan);
    let v: Vec<String> = w.v.iter().map(|x| fmt_num(*x)).collect();
    let _ = writeln!(s, "v = ({})", v.join(" "));
    let _ = writeln!(s, "rates = {} {}", fmt_num(w.rates.0), fmt_num(w.rates.1));
    let blocks: Vec<String> = w.blocks.iter().map(u64::to_string).collect();
    let _ = writeln!(s, "blocks = {}", blocks.join(" "));
    let _ = writeln!(s, "word length = {}", w.word.len());
    let _ = writeln!(s, "word = {}", w.word);
    let _ = writeln!(s, "certified gap = {}", fmt_num(w.certified_gap));
    checkpoints_text(&mut s, &w.checkpoints);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_num(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(-2.0), "-2");
        assert_eq!(fmt_num(1e-9), "1e-9");
        assert_eq!(fmt_num(123456.0), "123456");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(6.02214076e23), "6.02214076e23");
    }

    #[test]
    fn csv_quotes_and_header() {
        let mut c = Csv::new(&[("seed".into(), "3".into())], &["a", "b"]);
        c.push(vec![Cell::Num(0.25), Cell::Text("x,y".into())]);
        assert_eq!(c.render(), "# seed = 3\na,b\n0.25,\"x,y\"\n");
    }
}
