//! Decay series, their CSV form, and power-law rate fits.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "label,t,p,raw_norm,weighted_value,truncation_bound";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub t: f64,
    pub p: f64,
    pub raw_norm: f64,
    /// `t^(1/2 - 1/p) * raw_norm`.
    pub weighted_value: f64,
    /// Bound on the part of the weighted value lost outside the grid.
    pub truncation_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries {
    pub label: String,
    rows: Vec<DecayRow>,
}

/// `t^(1/2 - 1/p)`.
pub fn decay_weight(t: f64, p: f64) -> f64 {
    t.powf(0.5 - 1.0 / p)
}

/// Weighted `L^p` norm of `|alpha| / (2 pi |x|)` outside radius `r_outer`,
/// which dominates any Oseen vortex of amplitude `alpha`.
pub fn oseen_tail_bound(alpha: f64, t: f64, p: f64, r_outer: f64) -> f64 {
    let tail = alpha.abs() / (2.0 * std::f64::consts::PI)
        * (2.0 * std::f64::consts::PI * r_outer.powf(2.0 - p) / (p - 2.0)).powf(1.0 / p);
    decay_weight(t, p) * tail
}

impl DecaySeries {
    pub fn new(label: impl Into<String>) -> Self {
        DecaySeries {
            label: label.into(),
            rows: Vec::new(),
        }
    }

    pub fn rows(&self) -> &[DecayRow] {
        &self.rows
    }

    /// Appends a measurement, deriving the weighted value from `raw_norm`.
    pub fn record(&mut self, t: f64, p: f64, raw_norm: f64, truncation_bound: f64) -> Result<()> {
        self.push(DecayRow {
            t,
            p,
            raw_norm,
            weighted_value: decay_weight(t, p) * raw_norm,
            truncation_bound,
        })
    }

    pub fn push(&mut self, row: DecayRow) -> Result<()> {
        let fields = [row.t, row.p, row.raw_norm, row.weighted_value, row.truncation_bound];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("decay row {row:?}")));
        }
        if row.raw_norm < 0.0 || row.weighted_value < 0.0 || row.truncation_bound < 0.0 {
            return Err(Error::InvalidArgument(format!("negative entry in decay row {row:?}")));
        }
        if let Some(prev) = self.rows.iter().rev().find(|r| r.p == row.p) {
            if !(row.t > prev.t) {
                return Err(Error::InvalidArgument(format!(
                    "times must increase for p = {}: {} after {}",
                    row.p, row.t, prev.t
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    /// Exponents present, in first-seen order.
    pub fn exponents(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.p) {
                out.push(r.p);
            }
        }
        out
    }

    /// `(t, weighted_value)` for one exponent.
    pub fn weighted(&self, p: f64) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.p == p)
            .map(|r| (r.t, r.weighted_value))
            .collect()
    }

    pub fn value_at(&self, t: f64, p: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.p == p && r.t == t)
            .map(|r| r.weighted_value)
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(mut w: W, series: &[DecaySeries]) -> Result<()> {
    write!(w, "{CSV_HEADER}\n")?;
    for s in series {
        if s.label.contains([',', '\n', '\r', '"']) {
            return Err(Error::InvalidArgument(format!("label `{}` cannot be written to CSV", s.label)));
        }
        for r in &s.rows {
            write!(
                w,
                "{},{},{},{},{},{}\n",
                s.label,
                fmt17(r.t),
                fmt17(r.p),
                fmt17(r.raw_norm),
                fmt17(r.weighted_value),
                fmt17(r.truncation_bound)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads series back, grouping rows by label in first-seen order.
pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<DecaySeries>> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.ok_or(Error::Csv {
        line: 1,
        message: "missing header".into(),
    })?;
    if header.trim_end_matches('\r') != CSV_HEADER {
        return Err(Error::Csv {
            line: 1,
            message: format!("expected header `{CSV_HEADER}`"),
        });
    }
    let mut out: Vec<DecaySeries> = Vec::new();
    for (n, line) in lines.enumerate() {
        let line_no = n + 2;
        let line = line?;
        let err = |message: String| Error::Csv { line: line_no, message };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(err(format!("expected 6 columns, found {}", cols.len())));
        }
        let mut v = [0.0; 5];
        for (k, c) in cols[1..].iter().enumerate() {
            v[k] = c.parse().map_err(|_| err(format!("`{c}` is not a number")))?;
        }
        let row = DecayRow {
            t: v[0],
            p: v[1],
            raw_norm: v[2],
            weighted_value: v[3],
            truncation_bound: v[4],
        };
        let idx = match out.iter().position(|s| s.label == cols[0]) {
            Some(i) => i,
            None => {
                out.push(DecaySeries::new(cols[0]));
                out.len() - 1
            }
        };
        out[idx].push(row).map_err(|e| err(e.to_string()))?;
    }
    Ok(out)
}

/// Least-squares fit of `ln value = slope ln t + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `ln value`.
    pub residual: f64,
    pub n_points: usize,
}

/// Fits the points with `t` in the closed window `[lo, hi]`.
pub fn fit_points(points: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    let sel: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .collect();
    if sel.len() < 4 {
        return Err(Error::DegenerateWindow(format!(
            "{} points in [{}, {}], need at least 4",
            sel.len(),
            window.0,
            window.1
        )));
    }
    if let Some((t, v)) = sel.iter().find(|(t, v)| !(*t > 0.0 && *v > 0.0)) {
        return Err(Error::DegenerateWindow(format!("nonpositive point ({t}, {v})")));
    }
    let n = sel.len() as f64;
    let xs: Vec<f64> = sel.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = sel.iter().map(|(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateWindow("all times coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(RateFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        n_points: sel.len(),
    })
}

/// Fits the weighted values of one exponent of a series.
pub fn fit_rate(series: &DecaySeries, p: f64, window: (f64, f64)) -> Result<RateFit> {
    fit_points(&series.weighted(p), window)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DecaySeries {
        let mut s = DecaySeries::new("u");
        for t in [1.0, 2.0, 4.0, 8.0] {
            s.record(t, 4.0, 1.0 / t, 0.0).unwrap();
            s.record(t, 6.0, 0.1 / t, 1e-3).unwrap();
        }
        s
    }

    #[test]
    fn weights_are_applied() {
        let s = sample();
        let r = s.rows()[2];
        assert_eq!(r.weighted_value, 2f64.powf(0.25) * 0.5);
        assert_eq!(s.exponents(), vec![4.0, 6.0]);
        assert_eq!(s.value_at(8.0, 4.0), Some(8f64.powf(0.25) / 8.0));
    }

    #[test]
    fn rejects_out_of_order_rows() {
        let mut s = sample();
        assert!(s.record(8.0, 4.0, 1.0, 0.0).is_err());
        assert!(s.record(9.0, 4.0, -1.0, 0.0).is_err());
        assert!(s.record(9.0, 4.0, f64::NAN, 0.0).is_err());
        assert!(s.record(1.0, 8.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut s2 = DecaySeries::new("S(t)H-Theta");
        s2.record(5.0, 4.0, std::f64::consts::PI * 1e-7, 1.0 / 3.0).unwrap();
        let series = vec![sample(), s2];
        let mut buf = Vec::new();
        write_csv(&mut buf, &series).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("{CSV_HEADER}\n")));
        assert!(!text.contains('\r'));
        assert!(text.contains("1.0000000000000000e0"));
        assert_eq!(read_csv(&buf[..]).unwrap(), series);
    }

    #[test]
    fn csv_reader_reports_line_numbers() {
        let bad_header = "label,t,p\n";
        assert!(matches!(read_csv(bad_header.as_bytes()), Err(Error::Csv { line: 1, .. })));
        let bad_row = format!("{CSV_HEADER}\nu,1,4,1,1,0\nu,2,4,x,1,0\n");
        assert!(matches!(read_csv(bad_row.as_bytes()), Err(Error::Csv { line: 3, .. })));
        let short = format!("{CSV_HEADER}\nu,1,4\n");
        assert!(matches!(read_csv(short.as_bytes()), Err(Error::Csv { line: 2, .. })));
        assert!(matches!(read_csv(&b""[..]), Err(Error::Csv { line: 1, .. })));
        assert!(write_csv(Vec::new(), &[DecaySeries::new("a,b")]).is_err());
    }

    #[test]
    fn exact_power_law_slope() {
        let pts: Vec<(f64, f64)> = [1.0_f64, 2.0, 5.0, 10.0, 50.0].iter().map(|&t| (t, 3.0 / t.sqrt())).collect();
        let fit = fit_points(&pts, (1.0, 50.0)).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-8);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        let flat: Vec<(f64, f64)> = pts.iter().map(|&(t, _)| (t, 2.0)).collect();
        assert_eq!(fit_points(&flat, (0.0, 100.0)).unwrap().slope, 0.0);
    }

    #[test]
    fn degenerate_windows() {
        let pts = [(1.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 0.0)];
        assert!(matches!(fit_points(&pts, (0.0, 10.0)), Err(Error::DegenerateWindow(_))));
        assert!(matches!(fit_points(&pts[..3], (0.0, 10.0)), Err(Error::DegenerateWindow(_))));
        assert!(matches!(fit_points(&pts, (1.5, 10.0)), Err(Error::DegenerateWindow(_))));
    }

    #[test]
    fn tail_bound_matches_radial_integral() {
        let (p, r) = (4.0, 10.0);
        let direct = crate::analytic::radial_lp_norm(|x| 1.0 / (2.0 * std::f64::consts::PI * x), p, r, r * 1e6, 200_000);
        let bound = oseen_tail_bound(1.0, 1.0, p, r);
        assert!((direct - bound).abs() < 1e-6 * bound, "{direct} {bound}");
    }
}
