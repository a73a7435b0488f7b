//! Report serialization. Complex values are `[re, im]` pairs in JSON and
//! split columns in CSV, written with 17 significant digits.

use std::io::Write;
use std::path::Path;

use evanskit::fredholm::Det2Report;
use evanskit::{ComplexMatrix, C64};
use serde_json::{json, Value};

pub const SCAN_HEADER: [&str; 10] =
    ["re_z", "im_z", "re_D", "im_D", "re_det2", "im_det2", "re_theta", "im_theta", "residual", "status"];

pub fn pair(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix(m: &ComplexMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(|&z| pair(z)).collect())).collect())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A scan row: the point, its report (or failure) and a status word.
pub struct Row<'a> {
    pub z: C64,
    pub report: Option<&'a Det2Report>,
    pub status: &'a str,
}

pub fn rows_csv(rows: &[Row]) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SCAN_HEADER).map_err(|e| e.to_string())?;
    for row in rows {
        let mut rec = vec![num(row.z.re), num(row.z.im)];
        match row.report {
            Some(r) => {
                let det2 = r.det2_semiseparable;
                for v in [r.evans_det.re, r.evans_det.im, det2.re, det2.im, r.theta.re, r.theta.im, r.identity_residual] {
                    rec.push(num(v));
                }
            }
            None => rec.extend(std::iter::repeat_n("NaN".to_string(), 7)),
        }
        rec.push(row.status.to_string());
        w.write_record(&rec).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

pub fn rows_json(rows: &[Row], errors: &[Option<String>]) -> Value {
    Value::Array(
        rows.iter()
            .zip(errors)
            .map(|(row, err)| {
                let mut v = row.report.map_or_else(|| json!({}), Det2Report::to_json);
                v["z"] = pair(row.z);
                v["status"] = json!(row.status);
                if let Some(e) = err {
                    v["error"] = json!(e);
                }
                v
            })
            .collect(),
    )
}

/// Writes `text` to the file, or to standard output without a path.
pub fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}
