//! CSV and JSON readers/writers shared by the CLI subcommands.
//!
//! CSV is RFC-4180 (CRLF line endings, '.' decimal); all floating-point
//! fields use scientific notation with 17 significant digits so values
//! round-trip bitwise through the text form.

use crate::error::{BeamError, Result};
use crate::genfun::GenTable;
use crate::model::{BeamParams, BeamState, GridFunction};
use crate::sim::{SampledInput, SimResult};
use crate::spectral::Spectrum;
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::Path;

/// Schema tag stamped into every report.json.
pub const REPORT_SCHEMA: &str = "beamflat-report-v1";

/// 17 significant digits: enough for f64 round-trip fidelity.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| BeamError::Parse(format!("{what}: {e} (field {field:?})")))
}

/// Split a CSV payload into trimmed rows of fields. The numeric files written
/// here never contain quoted fields, so a plain comma split suffices; quoted
/// input is rejected rather than mis-parsed.
fn csv_rows(text: &str, what: &str) -> Result<Vec<Vec<String>>> {
    if text.contains('"') {
        return Err(BeamError::Parse(format!(
            "{what}: quoted CSV fields are not supported"
        )));
    }
    Ok(text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|f| f.trim().to_string()).collect())
        .collect())
}

pub fn read_params(path: &Path) -> Result<BeamParams> {
    let text = fs::read_to_string(path)?;
    BeamParams::from_json(&text)
}

pub fn write_params(path: &Path, params: &BeamParams) -> Result<()> {
    let mut s = serde_json::to_string_pretty(params)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// BeamState as CSV: columns x, u, v; the header row's trailing two columns
/// carry alpha and beta, which the first data row fills in.
pub fn write_state_csv(path: &Path, state: &BeamState) -> Result<()> {
    let mut out = String::new();
    out.push_str("x,u,v,alpha,beta\r\n");
    let n = state.u.values.len();
    let h = state.u.h();
    for i in 0..n {
        let x = state.u.x0 + i as f64 * h;
        out.push_str(&fmt17(x));
        out.push(',');
        out.push_str(&fmt17(state.u.values[i]));
        out.push(',');
        out.push_str(&fmt17(state.v.values[i]));
        if i == 0 {
            out.push(',');
            out.push_str(&fmt17(state.alpha));
            out.push(',');
            out.push_str(&fmt17(state.beta));
        } else {
            out.push_str(",,");
        }
        out.push_str("\r\n");
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_state_csv(path: &Path) -> Result<BeamState> {
    let text = fs::read_to_string(path)?;
    let rows = csv_rows(&text, "state csv")?;
    if rows.len() < 2 || rows[0].len() < 5 {
        return Err(BeamError::Parse(
            "state csv: expected header x,u,v,alpha,beta and data rows".into(),
        ));
    }
    let data = &rows[1..];
    let mut xs = Vec::with_capacity(data.len());
    let mut u = Vec::with_capacity(data.len());
    let mut v = Vec::with_capacity(data.len());
    for row in data {
        if row.len() < 3 {
            return Err(BeamError::Parse("state csv: short row".into()));
        }
        xs.push(parse_f64(&row[0], "state csv x")?);
        u.push(parse_f64(&row[1], "state csv u")?);
        v.push(parse_f64(&row[2], "state csv v")?);
    }
    let alpha = parse_f64(&data[0][3], "state csv alpha")?;
    let beta = parse_f64(&data[0][4], "state csv beta")?;
    let (x0, x1) = (xs[0], *xs.last().unwrap());
    BeamState::new(
        GridFunction::new(x0, x1, u)?,
        GridFunction::new(x0, x1, v)?,
        alpha,
        beta,
    )
}

/// plan.csv: columns t, f, y on the plan's uniform time grid.
pub fn write_plan_csv(path: &Path, plan: &crate::planner::Plan) -> Result<()> {
    let mut out = String::from("t,f,y\r\n");
    for i in 0..plan.times.len() {
        out.push_str(&fmt17(plan.times[i]));
        out.push(',');
        out.push_str(&fmt17(plan.f_samples[i]));
        out.push(',');
        out.push_str(&fmt17(plan.y_samples[i]));
        out.push_str("\r\n");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read the control column of a plan.csv (or any t,f[,...] file with a
/// uniform time grid) as a simulator input signal.
pub fn read_input_csv(path: &Path) -> Result<SampledInput> {
    let text = fs::read_to_string(path)?;
    let rows = csv_rows(&text, "input csv")?;
    if rows.len() < 3 {
        return Err(BeamError::Parse("input csv: need at least two samples".into()));
    }
    let data = &rows[1..];
    let mut times = Vec::with_capacity(data.len());
    let mut values = Vec::with_capacity(data.len());
    for row in data {
        if row.len() < 2 {
            return Err(BeamError::Parse("input csv: short row".into()));
        }
        times.push(parse_f64(&row[0], "input csv t")?);
        values.push(parse_f64(&row[1], "input csv f")?);
    }
    let t_end = *times.last().unwrap();
    let h = t_end / (times.len() - 1) as f64;
    for (i, &t) in times.iter().enumerate() {
        if (t - i as f64 * h).abs() > 1e-9 * t_end.max(1.0) {
            return Err(BeamError::Parse(
                "input csv: time grid must be uniform starting at 0".into(),
            ));
        }
    }
    Ok(SampledInput { t_end, values })
}

/// gentable.json: boundary values of the generating sequences.
pub fn write_gentable_json(path: &Path, table: &GenTable) -> Result<()> {
    let doc = json!({
        "K": table.k_max,
        "grid_n": table.grid_n,
        "gL": table.g_l,
        "gxL": table.gx_l,
        "hL": table.h_l,
        "hxL": table.hx_l,
    });
    write_json(path, &doc)
}

/// spectrum.json: one record per eigenvalue.
pub fn write_spectrum_json(path: &Path, spectrum: &Spectrum) -> Result<()> {
    let records: Vec<Value> = spectrum
        .pairs
        .iter()
        .map(|p| {
            json!({
                "omega": p.omega,
                "u0": p.u0,
                "residuals": [p.residual_u_l, p.residual_ux_l],
            })
        })
        .collect();
    write_json(path, &Value::Array(records))
}

/// modes.csv: x followed by Re u_n, Im u_n per mode (the shapes are real on
/// the imaginary axis, so the Im columns are zero; kept for schema stability).
pub fn write_modes_csv(path: &Path, spectrum: &Spectrum) -> Result<()> {
    if spectrum.pairs.is_empty() {
        return Err(BeamError::InvalidParameter("no modes to write".into()));
    }
    let mut out = String::from("x");
    for i in 1..=spectrum.pairs.len() {
        out.push_str(&format!(",re_u_{i},im_u_{i}"));
    }
    out.push_str("\r\n");
    let grid = &spectrum.pairs[0].u;
    let n = grid.values.len();
    let h = grid.h();
    for j in 0..n {
        out.push_str(&fmt17(grid.x0 + j as f64 * h));
        for p in &spectrum.pairs {
            out.push(',');
            out.push_str(&fmt17(p.u.values[j]));
            out.push_str(",0.0e0");
        }
        out.push_str("\r\n");
    }
    fs::write(path, out)?;
    Ok(())
}

/// tip.csv: t, w(0,t), w_x(0,t) at every snapshot.
pub fn write_tip_csv(path: &Path, result: &SimResult) -> Result<()> {
    let mut out = String::from("t,w0,wx0\r\n");
    for &(t, w0, wx0) in &result.tip {
        out.push_str(&fmt17(t));
        out.push(',');
        out.push_str(&fmt17(w0));
        out.push(',');
        out.push_str(&fmt17(wx0));
        out.push_str("\r\n");
    }
    fs::write(path, out)?;
    Ok(())
}

/// field.csv: long-format t, x, w, w_t over all snapshots. Streamed — this
/// file can run to hundreds of MB at fine snapshot spacing.
pub fn write_field_csv(path: &Path, result: &SimResult) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(b"t,x,w,w_t\r\n")?;
    for (i, &t) in result.times.iter().enumerate() {
        let snap = &result.snapshots[i];
        let h = snap.u.h();
        for j in 0..snap.u.values.len() {
            let x = snap.u.x0 + j as f64 * h;
            writeln!(
                w,
                "{},{},{},{}\r",
                fmt17(t),
                fmt17(x),
                fmt17(snap.u.values[j]),
                fmt17(snap.v.values[j])
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Serialize a JSON document with a trailing newline. serde_json's f64
/// formatting is shortest-round-trip, so identical inputs give
/// byte-identical files.
pub fn write_json(path: &Path, doc: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::steady_state;
    use crate::testutil::sec6_params;

    #[test]
    fn state_csv_round_trips_bitwise() {
        let p = sec6_params(64);
        let mut z = steady_state(&p, 0.3);
        z.alpha = -1.25e-7;
        z.beta = 3.0;
        for (i, v) in z.v.values.iter_mut().enumerate() {
            *v = (i as f64 * 0.1).sin() * 1e-3;
        }
        let dir = std::env::temp_dir().join("beamflat-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("state.csv");
        write_state_csv(&path, &z).unwrap();
        let back = read_state_csv(&path).unwrap();
        assert_eq!(back.u.values, z.u.values);
        assert_eq!(back.v.values, z.v.values);
        assert_eq!(back.alpha, z.alpha);
        assert_eq!(back.beta, z.beta);
    }

    #[test]
    fn params_json_round_trips() {
        let p = sec6_params(128);
        let dir = std::env::temp_dir().join("beamflat-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("params.json");
        write_params(&path, &p).unwrap();
        let back = read_params(&path).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn input_csv_rejects_nonuniform_grid() {
        let dir = std::env::temp_dir().join("beamflat-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "t,f\r\n0.0,1.0\r\n0.4,1.0\r\n1.0,1.0\r\n").unwrap();
        assert!(read_input_csv(&path).is_err());
    }
}
