use std::str::FromStr;

use gausshcrb::bounds;
use gausshcrb::hcrb::{self, MinimizerConfig};
use gausshcrb::{Model, ModelPoint};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::format::sig12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    CS,
    CH,
    Heterodyne,
    ZOpt,
    FOpt,
    DoubleHomodyne,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::CS => "c_s",
            Quantity::CH => "c_h",
            Quantity::Heterodyne => "heterodyne",
            Quantity::ZOpt => "z_opt",
            Quantity::FOpt => "f_opt",
            Quantity::DoubleHomodyne => "double_homodyne",
        }
    }

    fn available_for(self, model: Model) -> bool {
        match self {
            Quantity::CS | Quantity::CH => true,
            Quantity::Heterodyne | Quantity::ZOpt | Quantity::FOpt => model == Model::SingleMode,
            Quantity::DoubleHomodyne => model == Model::TwoMode,
        }
    }

    pub fn defaults(model: Model) -> Vec<Quantity> {
        match model {
            Model::SingleMode => vec![Quantity::CS, Quantity::CH, Quantity::Heterodyne],
            Model::TwoMode => vec![Quantity::CS, Quantity::CH, Quantity::DoubleHomodyne],
        }
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s.trim() {
            "c_s" => Quantity::CS,
            "c_h" => Quantity::CH,
            "heterodyne" => Quantity::Heterodyne,
            "z_opt" => Quantity::ZOpt,
            "f_opt" => Quantity::FOpt,
            "double_homodyne" => Quantity::DoubleHomodyne,
            other => return Err(format!("unknown quantity '{other}'")),
        })
    }
}

/// `min:max:steps`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RRange {
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
}

impl FromStr for RRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(format!("expected min:max:steps, got '{s}'"));
        };
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
        Ok(Self {
            r_min: parse(lo)?,
            r_max: parse(hi)?,
            steps: n.trim().parse().map_err(|e| format!("'{n}': {e}"))?,
        })
    }
}

impl RRange {
    pub fn values(&self) -> Vec<f64> {
        let h = (self.r_max - self.r_min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.r_max } else { self.r_min + h * i as f64 }).collect()
    }
}

impl Default for RRange {
    fn default() -> Self {
        Self { r_min: 0.0, r_max: 1.5, steps: 7 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub range: RRange,
    pub model: Model,
    pub quantities: Vec<Quantity>,
}

impl ScanSpec {
    pub fn new(range: RRange, model: Model, quantities: Vec<Quantity>) -> CliResult<Self> {
        let RRange { r_min, r_max, steps } = range;
        if !(r_min.is_finite() && r_max.is_finite()) || r_min < 0.0 {
            return Err(CliError::BadArgs(format!("r range must satisfy 0 ≤ r_min, got {r_min}")));
        }
        if r_max <= r_min {
            return Err(CliError::BadArgs(format!("r_max must exceed r_min, got {r_min}:{r_max}")));
        }
        if steps < 2 {
            return Err(CliError::BadArgs(format!("at least 2 steps are required, got {steps}")));
        }
        if quantities.is_empty() {
            return Err(CliError::BadArgs("no quantities requested".into()));
        }
        if let Some(q) = quantities.iter().find(|q| !q.available_for(model)) {
            return Err(CliError::BadArgs(format!("quantity {} is not defined for the {} model", q.name(), model.name())));
        }
        Ok(Self { range, model, quantities })
    }
}

/// One row of a scan: `r` followed by the requested quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub r: f64,
    pub values: Vec<f64>,
}

fn evaluate_row(spec: &ScanSpec, r: f64, cfg: &MinimizerConfig) -> CliResult<OutputRecord> {
    let p = ModelPoint::new(spec.model, [0.0, 0.0, r])?;
    let mut gendyne = None;
    let mut values = Vec::with_capacity(spec.quantities.len());
    for q in &spec.quantities {
        let v = match q {
            Quantity::CS => bounds::sld_crb(&p),
            Quantity::CH => hcrb::minimize_h(&p, cfg)?.value,
            Quantity::Heterodyne => bounds::heterodyne_precision(r),
            Quantity::DoubleHomodyne => bounds::double_homodyne_precision(r)?,
            Quantity::ZOpt | Quantity::FOpt => {
                let opt = match gendyne {
                    Some(o) => o,
                    None => *gendyne.insert(hcrb::optimal_gendyne(r)?),
                };
                if *q == Quantity::ZOpt {
                    opt.z_opt
                } else {
                    opt.f_opt
                }
            }
        };
        values.push(v);
    }
    Ok(OutputRecord { r, values })
}

/// Evaluates every row, spreading rows over the available cores. Rows are
/// gathered in `r` order, so the output does not depend on scheduling.
pub fn run_scan(spec: &ScanSpec, cfg: &MinimizerConfig) -> CliResult<Vec<OutputRecord>> {
    let rs = spec.range.values();
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(rs.len());
    let mut slots: Vec<Option<CliResult<OutputRecord>>> = (0..rs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunk = rs.len().div_ceil(workers);
        for (rows, out) in rs.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (r, slot) in rows.iter().zip(out.iter_mut()) {
                    *slot = Some(evaluate_row(spec, *r, cfg));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every row is evaluated")).collect()
}

pub fn header(spec: &ScanSpec) -> Vec<String> {
    std::iter::once("r".to_string()).chain(spec.quantities.iter().map(|q| q.name().to_string())).collect()
}

pub fn to_csv(spec: &ScanSpec, rows: &[OutputRecord]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(spec))?;
    for row in rows {
        w.write_record(std::iter::once(sig12(row.r)).chain(row.values.iter().map(|v| sig12(*v))))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn to_json(spec: &ScanSpec, rows: &[OutputRecord]) -> CliResult<Vec<u8>> {
    let columns = header(spec);
    let records: Vec<serde_json::Map<String, serde_json::Value>> = rows
        .iter()
        .map(|row| {
            std::iter::once(row.r)
                .chain(row.values.iter().copied())
                .zip(&columns)
                .map(|(v, name)| {
                    let rounded: f64 = sig12(v).parse().expect("formatted number parses");
                    (name.clone(), serde_json::json!(rounded))
                })
                .collect()
        })
        .collect();
    let doc = serde_json::json!({ "model": spec.model, "columns": columns, "rows": records });
    let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn to_table(spec: &ScanSpec, rows: &[OutputRecord]) -> Vec<u8> {
    let columns = header(spec);
    let mut out = columns.iter().map(|c| format!("{c:>18}")).collect::<String>();
    out.push('\n');
    for row in rows {
        for v in std::iter::once(row.r).chain(row.values.iter().copied()) {
            out.push_str(&format!("{:>18}", sig12(v)));
        }
        out.push('\n');
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ranges() {
        let r: RRange = "0:3:61".parse().unwrap();
        assert_eq!(r, RRange { r_min: 0.0, r_max: 3.0, steps: 61 });
        assert_eq!(r.values().len(), 61);
        assert_eq!(r.values()[60], 3.0);
        assert!("0:3".parse::<RRange>().is_err());
        assert!("a:3:4".parse::<RRange>().is_err());
    }

    #[test]
    fn rejects_degenerate_specs() {
        let bad = RRange { r_min: 0.0, r_max: 0.0, steps: 2 };
        assert!(ScanSpec::new(bad, Model::SingleMode, vec![Quantity::CS]).is_err());
        let neg = RRange { r_min: -1.0, r_max: 1.0, steps: 3 };
        assert!(ScanSpec::new(neg, Model::SingleMode, vec![Quantity::CS]).is_err());
        assert!(ScanSpec::new(RRange::default(), Model::TwoMode, vec![Quantity::ZOpt]).is_err());
        assert!(ScanSpec::new(RRange::default(), Model::SingleMode, vec![Quantity::DoubleHomodyne]).is_err());
    }

    #[test]
    fn z_opt_scan_starts_at_one() {
        let spec = ScanSpec::new("0:3:7".parse().unwrap(), Model::SingleMode, vec![Quantity::ZOpt, Quantity::FOpt]).unwrap();
        let rows = run_scan(&spec, &MinimizerConfig::default()).unwrap();
        let csv = String::from_utf8(to_csv(&spec, &rows).unwrap()).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("r,z_opt,f_opt"));
        assert!(lines.next().unwrap().starts_with("0.00000000000,1.00000000000,0.500000000000"));
    }
}
