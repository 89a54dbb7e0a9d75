//! File formats: binary path dumps, CSV tables and atomic writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crossover_core::flow::Trajectory;
use crossover_core::measure::GridMeasure;
use crossover_core::noise::NoisePath;

use crate::LabError;

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), LabError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| LabError::Io(e.error))?;
    Ok(())
}

/// Header `(seed, t0, t1, level)` as little-endian 64-bit fields, then the
/// increments as little-endian `f64`.
pub fn dump_path(path: &NoisePath) -> Vec<u8> {
    let (t0, t1) = path.interval();
    let mut out = Vec::with_capacity(32 + 8 * path.cells());
    out.extend_from_slice(&path.seed().to_le_bytes());
    out.extend_from_slice(&t0.to_le_bytes());
    out.extend_from_slice(&t1.to_le_bytes());
    out.extend_from_slice(&u64::from(path.level()).to_le_bytes());
    for x in path.increments() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn load_path(bytes: &[u8]) -> Result<NoisePath, LabError> {
    let word = |i: usize| -> Result<[u8; 8], LabError> {
        bytes
            .get(8 * i..8 * i + 8)
            .map(|b| b.try_into().expect("eight bytes"))
            .ok_or_else(|| LabError::Format("truncated path dump".into()))
    };
    let seed = u64::from_le_bytes(word(0)?);
    let t0 = f64::from_le_bytes(word(1)?);
    let t1 = f64::from_le_bytes(word(2)?);
    let level = u64::from_le_bytes(word(3)?);
    let level = u32::try_from(level).map_err(|_| LabError::Format("level out of range".into()))?;
    let cells = 1usize.checked_shl(level).ok_or_else(|| LabError::Format("level out of range".into()))?;
    if bytes.len() != 8 * (4 + cells) {
        return Err(LabError::Format(format!("expected {} increments, found {} bytes", cells, bytes.len() - 32)));
    }
    let incs: Vec<f64> = (0..cells).map(|i| word(4 + i).map(f64::from_le_bytes)).collect::<Result<_, _>>()?;
    Ok(NoisePath::from_increments(seed, t0, t1, level, &incs)?)
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Result<Vec<u8>, LabError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<(), csv::Error>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    w.into_inner().map_err(|e| LabError::Io(e.into_error()))
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn trajectory_csv(traj: &Trajectory) -> Result<Vec<u8>, LabError> {
    csv_bytes(&["t", "theta", "rho", "z"], |w| {
        for s in &traj.samples {
            w.write_record([num(s.t), num(s.theta()), num(s.rho), opt(s.z)])?;
        }
        Ok(())
    })
}

pub fn shape_csv(shape: &GridMeasure) -> Result<Vec<u8>, LabError> {
    csv_bytes(&["t", "w"], |w| {
        for (t, m) in shape.atoms() {
            w.write_record([num(t), num(m)])?;
        }
        Ok(())
    })
}

/// Rows of `(column values)` under `header`.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, LabError> {
    csv_bytes(header, |w| {
        for r in rows {
            w.write_record(r)?;
        }
        Ok(())
    })
}

pub fn fmt_f64(x: f64) -> String {
    num(x)
}

pub fn fmt_opt(x: Option<f64>) -> String {
    opt(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_dump_round_trip() {
        let p = NoisePath::generate(42, -3.0, 5.0, 7).unwrap();
        let q = load_path(&dump_path(&p)).unwrap();
        assert_eq!(p, q);
        assert_eq!(p.refine().unwrap(), q.refine().unwrap());
        assert!(load_path(&dump_path(&p)[..40]).is_err());
    }

    #[test]
    fn csv_layout() {
        let bytes = table_csv(&["a", "b"], &[vec![fmt_f64(0.5), fmt_opt(None)]]).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "a,b\n0.5,\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("x/out.csv");
        write_atomic(&f, b"one").unwrap();
        write_atomic(&f, b"two").unwrap();
        assert_eq!(fs::read(&f).unwrap(), b"two");
        assert_eq!(fs::read_dir(f.parent().unwrap()).unwrap().count(), 1);
    }
}
