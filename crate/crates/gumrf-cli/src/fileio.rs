//! On-disk formats: the raw field file (text header + little-endian f64
//! payload), binary PGM images for label fields, and curve CSVs.

use anyhow::{bail, Context, Result};
use gumrf::field::{LabelField, RealField, RealFieldStack};
use gumrf::gum::ClassSet;
use gumrf::lattice::GridShape;
use gumrf::stats::PhasePoint;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Write a component stack: one ASCII header line
/// `"<height> <width> <components>\n"` followed by the components in
/// order, each row-major, every value a little-endian f64. Bit-exact on
/// round trip.
pub fn write_field_file(path: &Path, stack: &RealFieldStack) -> Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    let shape = stack.shape();
    writeln!(
        w,
        "{} {} {}",
        shape.height(),
        shape.width(),
        stack.num_components()
    )?;
    for comp in stack.components() {
        for &v in comp.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_file(path: &Path) -> Result<RealFieldStack> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut r = BufReader::new(file);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let parts: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().context("field file header"))
        .collect::<Result<_>>()?;
    let [h, w, p] = parts[..] else {
        bail!("field file header must be `height width components`");
    };
    let shape = GridShape::new(h, w)?;
    let mut components = Vec::with_capacity(p);
    let mut buf = [0u8; 8];
    for _ in 0..p {
        let mut values = Vec::with_capacity(shape.num_sites());
        for _ in 0..shape.num_sites() {
            r.read_exact(&mut buf).context("field file payload truncated")?;
            values.push(f64::from_le_bytes(buf));
        }
        components.push(RealField::new(shape, values)?);
    }
    Ok(RealFieldStack::new(components)?)
}

/// Binary PGM (P5) of a label field, gray level `255 * omega / omega_max`
/// rounded down, plus a `<path>.classes.txt` sidecar listing the exact
/// class labels in order.
pub fn write_label_pgm(path: &Path, field: &LabelField, classes: &ClassSet) -> Result<()> {
    let omega_max = *classes.omegas().last().expect("nonempty class set");
    if omega_max == 0 {
        bail!("largest class label must be positive for PGM scaling");
    }
    let shape = field.shape();
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write!(w, "P5\n{} {}\n255\n", shape.width(), shape.height())?;
    let pixels: Vec<u8> = field
        .labels()
        .iter()
        .map(|&l| ((255 * l as u64) / omega_max as u64) as u8)
        .collect();
    w.write_all(&pixels)?;
    w.flush()?;

    let sidecar = sidecar_path(path);
    let labels: Vec<String> = classes.omegas().iter().map(|o| o.to_string()).collect();
    std::fs::write(&sidecar, format!("classes: {}\n", labels.join(" ")))
        .with_context(|| format!("writing {}", sidecar.display()))?;
    Ok(())
}

pub fn sidecar_path(pgm: &Path) -> std::path::PathBuf {
    let mut s = pgm.as_os_str().to_owned();
    s.push(".classes.txt");
    std::path::PathBuf::from(s)
}

/// Long-format curve CSV: `x,mean,q10,q90` with a header row.
pub fn write_curve_csv(path: &Path, points: &[PhasePoint]) -> Result<()> {
    let mut out = String::from("x,mean,q10,q90\n");
    for p in points {
        out.push_str(&format!("{},{},{},{}\n", p.x, p.mean, p.q10, p.q90));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Generic CSV with caller-supplied header and rows.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use gumrf::rng::{RngSeed, StreamRng};

    #[test]
    fn field_file_round_trips_bit_exact() {
        let shape = GridShape::new(5, 7).unwrap();
        let mut rng = StreamRng::new(RngSeed(77));
        let comps: Vec<RealField> = (0..3)
            .map(|_| {
                let values = (0..35).map(|_| rng.next_f64() * 1e6 - 5e5).collect();
                RealField::new(shape, values).unwrap()
            })
            .collect();
        let stack = RealFieldStack::new(comps).unwrap();
        let dir = std::env::temp_dir().join("gumrf-fileio-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.field");
        write_field_file(&path, &stack).unwrap();
        let back = read_field_file(&path).unwrap();
        assert_eq!(stack.num_components(), back.num_components());
        for (a, b) in stack.components().iter().zip(back.components()) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn pgm_header_and_scaling() {
        let shape = GridShape::new(2, 3).unwrap();
        let classes = ClassSet::new(vec![0, 2, 4]).unwrap();
        let field = LabelField::new(shape, vec![0, 2, 4, 4, 0, 2]).unwrap();
        let dir = std::env::temp_dir().join("gumrf-fileio-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("labels.pgm");
        write_label_pgm(&path, &field, &classes).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0, 127, 255, 255, 0, 127]);
        let sidecar = std::fs::read_to_string(sidecar_path(&path)).unwrap();
        assert_eq!(sidecar, "classes: 0 2 4\n");
    }
}
