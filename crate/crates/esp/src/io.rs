//! File formats.
//!
//! * Particle files: line 1 holds `N`, line 2 `box Lx Ly Lz`, then one
//!   `q x y z` line per particle.
//! * Result files: `potentials.txt` (one `u_i` per line), `forces.txt`
//!   (`Fx Fy Fz` per line), `summary.txt` and `timings.txt` (`key=value`).
//! * Grid dumps: three little-endian `u64` grid sizes followed by the
//!   row-major values as little-endian `f64`.
//!
//! Floats are written in shortest round-trip form, so rereading a file gives
//! back the exact values.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use esp_core::{ParticleSystem, StageTimings};

use crate::report::Summary;
use crate::CliError;

pub const POTENTIALS_FILE: &str = "potentials.txt";
pub const FORCES_FILE: &str = "forces.txt";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const TIMINGS_FILE: &str = "timings.txt";

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn format_system(system: &ParticleSystem) -> String {
    let l = system.box_lengths();
    let mut out = format!("{}\nbox {:e} {:e} {:e}\n", system.len(), l[0], l[1], l[2]);
    for (q, r) in system.charges().iter().zip(system.positions()) {
        out.push_str(&format!("{q:e} {:e} {:e} {:e}\n", r[0], r[1], r[2]));
    }
    out
}

pub fn write_system(path: &Path, system: &ParticleSystem) -> Result<(), CliError> {
    write_text(path, &format_system(system))
}

pub fn parse_system(text: &str) -> Result<ParticleSystem, CliError> {
    let bad = |line: usize, what: &str| CliError::Io(format!("particle file line {line}: {what}"));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let n: usize = first
        .trim()
        .parse()
        .map_err(|_| bad(1, "expected the particle count"))?;
    let (i, second) = lines.next().ok_or_else(|| bad(2, "missing box line"))?;
    let mut fields = second.split_whitespace();
    if fields.next() != Some("box") {
        return Err(bad(i + 1, "expected `box Lx Ly Lz`"));
    }
    let box_vals = parse_floats(fields, 3).ok_or_else(|| bad(i + 1, "expected three box lengths"))?;
    let mut positions = Vec::with_capacity(n);
    let mut charges = Vec::with_capacity(n);
    for (i, line) in lines {
        let v = parse_floats(line.split_whitespace(), 4).ok_or_else(|| bad(i + 1, "expected `q x y z`"))?;
        charges.push(v[0]);
        positions.push([v[1], v[2], v[3]]);
    }
    if charges.len() != n {
        return Err(CliError::Io(format!(
            "particle file declares {n} particles but lists {}",
            charges.len()
        )));
    }
    Ok(ParticleSystem::new(
        positions,
        charges,
        [box_vals[0], box_vals[1], box_vals[2]],
    )?)
}

fn parse_floats<'a>(fields: impl Iterator<Item = &'a str>, count: usize) -> Option<Vec<f64>> {
    let v: Vec<f64> = fields.map(|f| f.parse().ok()).collect::<Option<_>>()?;
    (v.len() == count).then_some(v)
}

pub fn read_system(path: &Path) -> Result<ParticleSystem, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_system(&text)
}

/// Write potentials, forces and the summary into `dir` (created if needed).
pub fn write_results(
    dir: &Path,
    potentials: &[f64],
    forces: &[[f64; 3]],
    summary: &Summary,
) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut u = String::with_capacity(potentials.len() * 24);
    for v in potentials {
        u.push_str(&format!("{v:e}\n"));
    }
    write_text(&dir.join(POTENTIALS_FILE), &u)?;
    let mut f = String::with_capacity(forces.len() * 72);
    for v in forces {
        f.push_str(&format!("{:e} {:e} {:e}\n", v[0], v[1], v[2]));
    }
    write_text(&dir.join(FORCES_FILE), &f)?;
    write_text(&dir.join(SUMMARY_FILE), &summary.to_string())
}

pub fn write_timings(dir: &Path, timings: &StageTimings) -> Result<(), CliError> {
    let mut out = String::new();
    for (name, secs) in timings.entries() {
        out.push_str(&format!("{name}={secs:e}\n"));
    }
    out.push_str(&format!("total={:e}\n", timings.total()));
    write_text(&dir.join(TIMINGS_FILE), &out)
}

pub fn read_potentials(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse()
                .map_err(|_| CliError::Io(format!("{}: bad value `{l}`", path.display())))
        })
        .collect()
}

pub fn read_forces(path: &Path) -> Result<Vec<[f64; 3]>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            parse_floats(l.split_whitespace(), 3)
                .map(|v| [v[0], v[1], v[2]])
                .ok_or_else(|| CliError::Io(format!("{}: bad force line `{l}`", path.display())))
        })
        .collect()
}

pub fn write_grid(path: &Path, dims: [usize; 3], values: &[f64]) -> Result<(), CliError> {
    if values.len() != dims.iter().product::<usize>() {
        return Err(CliError::Usage(format!(
            "grid of {} values does not match dims {dims:?}",
            values.len()
        )));
    }
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| io_err(path, e));
    for n in dims {
        put(&(n as u64).to_le_bytes())?;
    }
    for v in values {
        put(&v.to_le_bytes())?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_grid(path: &Path) -> Result<([usize; 3], Vec<f64>), CliError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let truncated = || CliError::Io(format!("{}: truncated grid dump", path.display()));
    if bytes.len() < 24 {
        return Err(truncated());
    }
    let word = |i: usize| -> [u8; 8] { bytes[8 * i..8 * i + 8].try_into().unwrap() };
    let dims = [0, 1, 2].map(|i| u64::from_le_bytes(word(i)) as usize);
    let count: usize = dims.iter().product();
    if bytes.len() != 24 + 8 * count {
        return Err(truncated());
    }
    let values = (0..count).map(|i| f64::from_le_bytes(word(3 + i))).collect();
    Ok((dims, values))
}

pub fn write_kernel_dump(path: &Path, text: &str) -> Result<(), CliError> {
    write_text(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_round_trip_is_exact() {
        let s = ParticleSystem::new(
            vec![[0.1, 0.2, 0.3], [1.0 / 3.0, 2.5, 9.999999999]],
            vec![1.0, -1.0],
            [10.0, 10.0, 12.5],
        )
        .unwrap();
        assert_eq!(parse_system(&format_system(&s)).unwrap(), s);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(parse_system("").is_err());
        assert!(parse_system("1\nbox 1 1\n1 0 0 0\n").is_err());
        assert!(parse_system("2\nbox 1 1 1\n1 0 0 0\n").is_err());
        assert!(parse_system("1\nbox 1 1 1\n1 0 x 0\n").is_err());
    }
}
