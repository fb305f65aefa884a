//! File formats: field pairs (JSON sidecar plus raw angles) and CSV curves.
//!
//! A field stored under stem `f` is `f.json`,
//! `{"n": N, "l": L, "mask": [[start, len], ...]}` with runs of masked cells
//! in row-major order, and `f.bin`, `N^2` little-endian `f64` angles.

use crate::error::{LabError, Result};
use crate::fields::AngleField;
use crate::kinetic::KineticDensity;
use crate::production::GridMeasure;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub n: usize,
    pub l: f64,
    pub mask: Vec<[usize; 2]>,
}

/// `(stem.json, stem.bin)`. A stem given with either extension maps to the
/// same pair.
pub fn field_paths(stem: &Path) -> (PathBuf, PathBuf) {
    let base = match stem.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("bin") => stem.with_extension(""),
        _ => stem.to_path_buf(),
    };
    let with = |ext: &str| {
        let mut s = base.clone().into_os_string();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    };
    (with("json"), with("bin"))
}

pub fn mask_runs(mask: &[bool]) -> Vec<[usize; 2]> {
    let mut runs = Vec::new();
    let mut k = 0;
    while k < mask.len() {
        if mask[k] {
            let start = k;
            while k < mask.len() && mask[k] {
                k += 1;
            }
            runs.push([start, k - start]);
        } else {
            k += 1;
        }
    }
    runs
}

fn expand_runs(runs: &[[usize; 2]], len: usize) -> Result<Vec<bool>> {
    let mut mask = vec![false; len];
    let mut end = 0;
    for &[start, count] in runs {
        if count == 0 || start < end || start + count > len {
            return Err(LabError::FieldFormat(format!(
                "mask run [{start}, {count}] overlaps or leaves the grid"
            )));
        }
        mask[start..start + count].iter_mut().for_each(|m| *m = true);
        end = start + count;
    }
    Ok(mask)
}

pub fn write_field(field: &AngleField, stem: &Path) -> Result<()> {
    let (json, bin) = field_paths(stem);
    let header = FieldHeader {
        n: field.n(),
        l: field.l(),
        mask: mask_runs(field.mask()),
    };
    serde_json::to_writer(BufWriter::new(File::create(json)?), &header)?;
    let mut out = BufWriter::new(File::create(bin)?);
    for t in field.theta() {
        out.write_all(&t.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_field(stem: &Path) -> Result<AngleField> {
    let (json, bin) = field_paths(stem);
    let header: FieldHeader = serde_json::from_reader(File::open(json)?)
        .map_err(|e| LabError::FieldFormat(e.to_string()))?;
    let cells = header
        .n
        .checked_mul(header.n)
        .ok_or_else(|| LabError::FieldFormat(format!("n = {} overflows", header.n)))?;
    let mut bytes = Vec::new();
    File::open(bin)?.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * cells {
        return Err(LabError::FieldFormat(format!(
            "expected {} bytes of angles for n = {}, found {}",
            8 * cells,
            header.n,
            bytes.len()
        )));
    }
    let theta = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let mask = expand_runs(&header.mask, cells)?;
    AngleField::new(header.n, header.l, theta, mask)
}

/// One row of a probe table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    #[serde(rename = "field-id")]
    pub field_id: String,
    pub op: String,
    pub param: f64,
    pub value: f64,
    pub residual: f64,
}

pub fn write_probes<W: Write>(out: W, rows: &[ProbeRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Numeric table with a fixed header.
pub fn write_curve<W: Write, const K: usize>(out: W, header: [&str; K], rows: &[[f64; K]]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// `(s, S)` rows at the sample angles.
pub fn write_kinetic<W: Write>(out: W, sigma: &KineticDensity) -> Result<()> {
    let rows: Vec<[f64; 2]> = (0..sigma.samples())
        .map(|k| [sigma.angle(k), sigma.values()[k]])
        .collect();
    write_curve(out, ["s", "S"], &rows)
}

pub fn read_kinetic<R: Read>(input: R) -> Result<KineticDensity> {
    let mut r = csv::Reader::from_reader(input);
    let values = r
        .deserialize::<(f64, f64)>()
        .map(|rec| rec.map(|(_, v)| v))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    KineticDensity::from_values(values)
}

/// Cells of the window with nonzero density: `(ix, iy, x, y, density)`.
pub fn write_measure<W: Write>(out: W, mu: &GridMeasure) -> Result<()> {
    let (lo, hi) = mu.window();
    let h = mu.l / mu.n as f64;
    let mut rows = Vec::new();
    for iy in lo..hi {
        for ix in lo..hi {
            let d = mu.density[iy * mu.n + ix];
            if d != 0.0 {
                rows.push([ix as f64, iy as f64, (ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h, d]);
            }
        }
    }
    write_curve(out, ["ix", "iy", "x", "y", "density"], &rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::JumpConfig;
    use crate::fields::{make_jump_field, make_vortex_field};

    #[test]
    fn runs_round_trip() {
        let mask = [false, true, true, false, false, true, false, true];
        let runs = mask_runs(&mask);
        assert_eq!(runs, vec![[1, 2], [5, 1], [7, 1]]);
        assert_eq!(expand_runs(&runs, 8).unwrap(), mask);
        assert!(expand_runs(&[[2, 3], [3, 1]], 8).is_err());
        assert!(expand_runs(&[[6, 3]], 8).is_err());
    }

    #[test]
    fn stems_accept_either_extension() {
        let a = field_paths(Path::new("out/v"));
        assert_eq!(a, field_paths(Path::new("out/v.json")));
        assert_eq!(a, field_paths(Path::new("out/v.bin")));
        assert_eq!(a.1, PathBuf::from("out/v.bin"));
    }

    #[test]
    fn fields_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("vortex");
        let f = make_vortex_field([0.41, 0.52], true, 32, 1.0).unwrap();
        write_field(&f, &stem).unwrap();
        let g = read_field(&stem).unwrap();
        assert_eq!(g.mask(), f.mask());
        assert_eq!(g.masked_count(), 1);
        for (a, b) in f.theta().iter().zip(g.theta()) {
            assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
        std::fs::write(field_paths(&stem).1, [0u8; 10]).unwrap();
        assert!(matches!(read_field(&stem), Err(LabError::FieldFormat(_))));
    }

    #[test]
    fn kinetic_round_trip() {
        let s = crate::kinetic::sigma_jump(&JumpConfig::symmetric(0.4), 256).unwrap();
        let mut buf = Vec::new();
        write_kinetic(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("s,S\n"));
        assert_eq!(read_kinetic(&buf[..]).unwrap(), s);
    }

    #[test]
    fn probe_table_header() {
        let mut buf = Vec::new();
        let row = ProbeRow {
            field_id: "jump".into(),
            op: "defect".into(),
            param: 0.25,
            value: 1.5,
            residual: 0.0,
        };
        write_probes(&mut buf, &[row]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "field-id,op,param,value,residual\njump,defect,0.25,1.5,0.0\n");
    }

    #[test]
    fn measure_rows_are_the_support() {
        let f = make_jump_field(&JumpConfig::symmetric(0.5), [0.5, 0.5], 64, 1.0);
        let mu = crate::production::entropy_production(
            &f,
            &crate::entropy::build_entropy(&crate::circlegeom::TrigPolynomial::cos_mode(2)),
            4.0 / 64.0,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_measure(&mut buf, &mu).unwrap();
        let rows = String::from_utf8(buf).unwrap().lines().count() - 1;
        let support = mu.density.iter().filter(|d| **d != 0.0).count();
        assert!(rows > 0 && rows <= support);
    }
}
