//! Serialization of trajectories, rates and sweeps. CSV floats carry 17
//! significant digits so values round-trip exactly; every file opens with
//! a versioned header comment.

use serde::Serialize;

use fano_tunnel::adiabatic::AdiabaticResult;
use fano_tunnel::dynamics::TrajectoryPoint;
use fano_tunnel::rates::RateDecomposition;

pub const FORMAT_VERSION: u32 = 1;

pub const TRAJECTORY_COLUMNS: [&str; 6] = ["t", "rho_pp", "re_rho_pm", "im_rho_pm", "P", "delta"];
pub const RATES_COLUMNS: [&str; 7] = ["t", "P", "P_dot", "R_d", "R_u", "p1", "orbital_overlap"];
pub const ADIABATIC_COLUMNS: [&str; 6] =
    ["cutoff", "E0", "a0_sq", "I", "overlap", "effective_splitting"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Descriptive `key: value` lines placed in the header.
pub type Meta = Vec<(String, String)>;

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv<const N: usize>(kind: &str, meta: &Meta, columns: [&str; N], rows: &[[f64; N]]) -> String {
    let mut out = format!("# fano-tunnel {kind} v{FORMAT_VERSION}\n");
    for (k, v) in meta {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| float(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonTable<'a> {
    format: String,
    version: u32,
    meta: Vec<[&'a str; 2]>,
    columns: &'a [&'a str],
    rows: Vec<&'a [f64]>,
}

fn json<const N: usize>(kind: &str, meta: &Meta, columns: [&str; N], rows: &[[f64; N]]) -> String {
    let table = JsonTable {
        format: format!("fano-tunnel {kind}"),
        version: FORMAT_VERSION,
        meta: meta.iter().map(|(k, v)| [k.as_str(), v.as_str()]).collect(),
        columns: &columns,
        rows: rows.iter().map(|r| &r[..]).collect(),
    };
    let mut s = serde_json::to_string_pretty(&table).expect("tables of finite floats serialize");
    s.push('\n');
    s
}

fn table<const N: usize>(
    format: Format,
    kind: &str,
    meta: &Meta,
    columns: [&str; N],
    rows: &[[f64; N]],
) -> String {
    match format {
        Format::Csv => csv(kind, meta, columns, rows),
        Format::Json => json(kind, meta, columns, rows),
    }
}

pub fn trajectory(format: Format, meta: &Meta, traj: &[TrajectoryPoint]) -> String {
    let rows: Vec<[f64; 6]> = traj
        .iter()
        .map(|p| [p.t, p.rho.rho_pp, p.rho.rho_pm.re, p.rho.rho_pm.im, p.p, p.delta])
        .collect();
    table(format, "trajectory", meta, TRAJECTORY_COLUMNS, &rows)
}

pub fn rates(format: Format, meta: &Meta, rates: &[RateDecomposition]) -> String {
    let rows: Vec<[f64; 7]> = rates
        .iter()
        .map(|r| [r.t, r.p, r.p_dot, r.r_d, r.r_u, r.p1, r.orbital_overlap])
        .collect();
    table(format, "rates", meta, RATES_COLUMNS, &rows)
}

pub fn adiabatic(format: Format, meta: &Meta, sweep: &[AdiabaticResult]) -> String {
    let rows: Vec<[f64; 6]> = sweep
        .iter()
        .map(|r| [r.cutoff, r.e0, r.a0_sq, r.i, r.overlap, r.effective_splitting])
        .collect();
    table(format, "adiabatic", meta, ADIABATIC_COLUMNS, &rows)
}

/// Parses the numeric rows of a CSV produced by this module.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or("missing column header")?;
    let columns: Vec<String> = header.split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|c| c.parse::<f64>().map_err(|e| format!("{c:?}: {e}")))
                .collect::<Result<Vec<f64>, String>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    if rows.iter().any(|r| r.len() != columns.len()) {
        return Err("row width differs from header".into());
    }
    Ok((columns, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_with_17_digits() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            let s = float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let digits = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(digits.len(), 17, "{s}");
        }
    }

    #[test]
    fn csv_has_header_and_parses_back() {
        let meta = vec![("scenario".into(), "x".into())];
        let text = csv("trajectory", &meta, ["a", "b"], &[[1.0, 0.1], [2.0, 1.0 / 3.0]]);
        assert!(text.starts_with("# fano-tunnel trajectory v1\n# scenario: x\na,b\n"));
        let (cols, rows) = parse_csv(&text).unwrap();
        assert_eq!(cols, vec!["a", "b"]);
        assert_eq!(rows[1][1], 1.0 / 3.0);
    }

    #[test]
    fn json_tables_round_trip() {
        let text = json("rates", &vec![], ["a"], &[[0.1], [1e-300]]);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["version"], 1);
        assert_eq!(v["rows"][1][0].as_f64().unwrap(), 1e-300);
    }
}
