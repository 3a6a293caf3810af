//! CSV serialisation of sampled fields.
//!
//! Lines are rows `t,re,im`, planes `x,y,re,im` (x-major) and tori
//! `u,v,re,im` preceded by a `# m=<int>` comment. Floats are written with
//! 17 significant digits so a write/read cycle is lossless.

use crate::error::{Error, Result};
use crate::grids::{GridSpec1D, PlaneField, SampledLine, TorusField, NODE_TOLERANCE};
use num_complex::Complex64;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

/// Any field that can be stored as CSV.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyField {
    Line(SampledLine),
    Plane(PlaneField),
    Torus(TorusField),
}

impl AnyField {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyField::Line(_) => "line",
            AnyField::Plane(_) => "plane",
            AnyField::Torus(_) => "torus",
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

pub fn write_line<W: Write>(f: &SampledLine, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["t", "re", "im"])?;
    for (k, z) in f.values.iter().enumerate() {
        w.write_record([fmt(f.grid.point(k)), fmt(z.re), fmt(z.im)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_plane<W: Write>(f: &PlaneField, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["x", "y", "re", "im"])?;
    for i in 0..f.gx.count {
        for j in 0..f.gy.count {
            let z = f.get(i, j);
            w.write_record([fmt(f.gx.point(i)), fmt(f.gy.point(j)), fmt(z.re), fmt(z.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_torus<W: Write>(f: &TorusField, mut out: W) -> Result<()> {
    writeln!(out, "# m={}", f.m)?;
    let mut w = writer(out);
    w.write_record(["u", "v", "re", "im"])?;
    for j in 0..f.nu {
        for k in 0..f.nv {
            let z = f.get(j, k);
            w.write_record([fmt(f.u(j)), fmt(f.v(k)), fmt(z.re), fmt(z.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_field<W: Write>(f: &AnyField, out: W) -> Result<()> {
    match f {
        AnyField::Line(f) => write_line(f, out),
        AnyField::Plane(f) => write_plane(f, out),
        AnyField::Torus(f) => write_torus(f, out),
    }
}

pub fn write_path(f: &AnyField, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_field(f, std::io::BufWriter::new(file))
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

/// Reads any of the three layouts, recognised by the header row.
pub fn read_field<R: Read>(input: R) -> Result<AnyField> {
    let mut reader = BufReader::new(input);
    let mut m = None;
    let mut first = String::new();
    loop {
        first.clear();
        if reader.read_line(&mut first)? == 0 {
            return Err(malformed("empty input"));
        }
        let line = first.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(value) = rest.trim().strip_prefix("m=") {
                let parsed: u32 = value.trim().parse().map_err(|_| malformed(format!("bad m in {line:?}")))?;
                m = Some(parsed);
            }
            continue;
        }
        if !line.is_empty() {
            break;
        }
    }
    let header: Vec<String> = first.trim().split(',').map(|s| s.trim().to_string()).collect();
    let mut rows = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data = Vec::new();
    for (n, rec) in rows.records().enumerate() {
        let rec = rec.map_err(|e| malformed(format!("row {}: {e}", n + 2)))?;
        if rec.len() != header.len() {
            return Err(malformed(format!("row {} has {} columns, expected {}", n + 2, rec.len(), header.len())));
        }
        let vals = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| malformed(format!("row {}: cannot parse {s:?}", n + 2))))
            .collect::<Result<Vec<f64>>>()?;
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(malformed(format!("row {}: non-finite value", n + 2)));
        }
        data.push(vals);
    }
    if data.is_empty() {
        return Err(malformed("no data rows"));
    }
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    match h.as_slice() {
        ["t", "re", "im"] => {
            let ts: Vec<f64> = data.iter().map(|r| r[0]).collect();
            let grid = infer_grid(&ts, "t")?;
            let values = data.iter().map(|r| Complex64::new(r[1], r[2])).collect();
            Ok(AnyField::Line(SampledLine::new(grid, values)?))
        }
        ["x", "y", "re", "im"] => {
            let (gx, gy, values) = read_product(&data, "x", "y")?;
            Ok(AnyField::Plane(PlaneField::new(gx, gy, values)?))
        }
        ["u", "v", "re", "im"] => {
            let m = m.ok_or_else(|| malformed("torus CSV without a '# m=<int>' line"))?;
            let (gu, gv, values) = read_product(&data, "u", "v")?;
            let (nu, nv) = (gu.count, gv.count);
            let on_unit = |g: &GridSpec1D, n: usize| {
                g.origin.abs() <= NODE_TOLERANCE && (g.step * n as f64 - 1.0).abs() <= NODE_TOLERANCE
            };
            if !on_unit(&gu, nu) || !on_unit(&gv, nv) {
                return Err(malformed("torus nodes must be j/nu, k/nv on [0,1)"));
            }
            Ok(AnyField::Torus(TorusField::new(nu, nv, m, values)?))
        }
        _ => Err(malformed(format!("unrecognised header {:?}", header.join(",")))),
    }
}

pub fn read_path(path: &Path) -> Result<AnyField> {
    read_field(std::fs::File::open(path)?)
}

/// A uniform grid through the given coordinates, in order.
fn infer_grid(ts: &[f64], name: &str) -> Result<GridSpec1D> {
    let n = ts.len();
    if n < 2 {
        return Err(malformed(format!("{name} needs at least two nodes")));
    }
    let step = (ts[n - 1] - ts[0]) / (n - 1) as f64;
    if !(step > 0.0) {
        return Err(malformed(format!("{name} must increase")));
    }
    let grid = GridSpec1D::new(ts[0], step, n)?;
    for (k, t) in ts.iter().enumerate() {
        if (grid.point(k) - t).abs() > NODE_TOLERANCE * (1.0 + t.abs()) {
            return Err(malformed(format!("{name} is not uniform at row {k}")));
        }
    }
    Ok(grid)
}

fn read_product(data: &[Vec<f64>], a: &str, b: &str) -> Result<(GridSpec1D, GridSpec1D, Vec<Complex64>)> {
    let first = data[0][0];
    let nb = data.iter().take_while(|r| r[0] == first).count();
    if data.len() % nb != 0 {
        return Err(malformed(format!("{} rows do not form a product grid", data.len())));
    }
    let na = data.len() / nb;
    let ga = infer_grid(&data.iter().step_by(nb).map(|r| r[0]).collect::<Vec<_>>(), a)?;
    let gb = infer_grid(&data[..nb].iter().map(|r| r[1]).collect::<Vec<_>>(), b)?;
    for (idx, r) in data.iter().enumerate() {
        let (i, j) = (idx / nb, idx % nb);
        if r[0] != data[i * nb][0] || r[1] != data[j][1] {
            return Err(malformed(format!("row {} breaks the {a}-major ordering", idx + 2)));
        }
    }
    debug_assert_eq!(ga.count, na);
    Ok((ga, gb, data.iter().map(|r| Complex64::new(r[2], r[3])).collect()))
}
