//! Benchmark report rows and the gap metric.
//!
//! The gap is `(obj - best) / obj`, truncated to three decimals.

use std::fmt::Write as _;

/// Gap in thousandths, truncated toward zero. `None` when `obj` is 0 but
/// `best` is not.
pub fn gap_thousandths(best: u64, obj: u64) -> Option<i64> {
    if obj == best {
        return Some(0);
    }
    if obj == 0 {
        return None;
    }
    let diff = i128::from(obj) - i128::from(best);
    Some((diff * 1000 / i128::from(obj)) as i64)
}

pub fn format_gap(thousandths: i64) -> String {
    if thousandths == 0 {
        return "0".into();
    }
    let sign = if thousandths < 0 { "-" } else { "" };
    let a = thousandths.unsigned_abs();
    format!("{sign}{}.{:03}", a / 1000, a % 1000)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub instance: String,
    pub interventions: usize,
    pub technicians: usize,
    pub domains: usize,
    pub levels: usize,
    pub best: Option<u64>,
    pub obj: u64,
}

impl BenchRow {
    pub fn gap(&self) -> Option<i64> {
        self.best.and_then(|b| gap_thousandths(b, self.obj))
    }
}

pub const HEADER: [&str; 8] = ["instance", "int.", "tec.", "dom.", "lev.", "best obj", "obj.", "gap"];

/// Left-aligned instance names, right-aligned numbers.
pub fn format_table(rows: &[BenchRow]) -> String {
    let cells: Vec<[String; 8]> = rows
        .iter()
        .map(|r| {
            [
                r.instance.clone(),
                r.interventions.to_string(),
                r.technicians.to_string(),
                r.domains.to_string(),
                r.levels.to_string(),
                r.best.map(|b| b.to_string()).unwrap_or_default(),
                r.obj.to_string(),
                r.gap().map(format_gap).unwrap_or_default(),
            ]
        })
        .collect();
    let mut width = HEADER.map(str::len);
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |row: [&str; 8]| {
        let mut s = format!("{:<w$}", row[0], w = width[0]);
        for k in 1..8 {
            write!(s, "  {:>w$}", row[k], w = width[k]).unwrap();
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(HEADER);
    for row in &cells {
        line(row.each_ref().map(String::as_str));
    }
    out
}
