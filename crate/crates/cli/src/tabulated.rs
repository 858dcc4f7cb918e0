//! Tabulated initial data: two- or three-column comma-separated text
//! `(r, f[, z])` with strictly increasing radii. Blank lines, `#` comments
//! and a single header line are tolerated.

use std::path::Path;

use anyhow::{bail, Context, Result};

use listflow_core::InitialDataSpec;

pub fn read(path: &Path) -> Result<InitialDataSpec> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("read {}", path.display()))?;
    let mut r = Vec::new();
    let mut f = Vec::new();
    let mut z: Option<Vec<f64>> = None;
    for (ln, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if r.is_empty() && cols[0].parse::<f64>().is_err() {
            continue; // header line
        }
        if cols.len() < 2 || cols.len() > 3 {
            bail!(
                "{}:{}: expected 2 or 3 columns, got {}",
                path.display(),
                ln + 1,
                cols.len()
            );
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .with_context(|| format!("{}:{}: bad number {s:?}", path.display(), ln + 1))
        };
        r.push(parse(cols[0])?);
        f.push(parse(cols[1])?);
        match (cols.len(), &mut z) {
            (3, Some(zs)) => zs.push(parse(cols[2])?),
            (3, slot @ None) => {
                if r.len() != 1 {
                    bail!("{}:{}: mixed 2- and 3-column rows", path.display(), ln + 1);
                }
                *slot = Some(vec![parse(cols[2])?]);
            }
            (2, Some(_)) => bail!("{}:{}: mixed 2- and 3-column rows", path.display(), ln + 1),
            _ => {}
        }
    }
    if r.len() < 2 {
        bail!("{}: needs at least two data rows", path.display());
    }
    Ok(InitialDataSpec::Tabulated { r, f, z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn reads_two_and_three_column_files() {
        let mut tf = tempfile::NamedTempFile::new().unwrap();
        writeln!(tf, "r,f,z\n# comment\n0.0,1.0,0.0\n1.0,1.1,0.05\n2.0,1.05,0.01").unwrap();
        match read(tf.path()).unwrap() {
            InitialDataSpec::Tabulated { r, f, z } => {
                assert_eq!(r.len(), 3);
                assert_eq!(f[1], 1.1);
                assert_eq!(z.unwrap()[2], 0.01);
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut tf = tempfile::NamedTempFile::new().unwrap();
        writeln!(tf, "0.0,1.0\n5.0,1.2").unwrap();
        match read(tf.path()).unwrap() {
            InitialDataSpec::Tabulated { z, .. } => assert!(z.is_none()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_rows() {
        let mut tf = tempfile::NamedTempFile::new().unwrap();
        writeln!(tf, "0.0,1.0,0.0\n1.0,1.1").unwrap();
        assert!(read(tf.path()).is_err());
        let mut tf = tempfile::NamedTempFile::new().unwrap();
        writeln!(tf, "0.0,abc\n1.0,1.1").unwrap();
        assert!(read(tf.path()).is_err());
    }
}
