//! Line-oriented trajectory files.
//!
//! ```text
//! # inclusive-irl trajectories v1
//! <T> <d> <x_0,0> <x_0,1> ... <x_T,d-1>
//! ```
//!
//! One record per line: horizon `T`, state dimension `d`, then `(T + 1) * d`
//! coordinates in row-major order, separated by single spaces. Coordinates
//! are written in shortest round-trip decimal form, so reading a file back
//! reproduces every value bit-for-bit. Blank lines and lines starting with
//! `#` are ignored. The header line is written but not required on input.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::types::{DemonstrationSet, Trajectory};

pub const HEADER: &str = "# inclusive-irl trajectories v1";

pub fn write_trajectories<'a, W: Write>(
    mut w: W,
    trajs: impl IntoIterator<Item = &'a Trajectory>,
) -> Result<()> {
    writeln!(w, "{HEADER}")?;
    for t in trajs {
        write!(w, "{} {}", t.horizon(), t.dim())?;
        for x in t.as_flat() {
            write!(w, " {x}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_trajectories<R: BufRead>(r: R) -> Result<Vec<Trajectory>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_record(line).map_err(|reason| Error::Parse {
            line: i + 1,
            reason,
        })?);
    }
    Ok(out)
}

pub fn write_demonstrations<W: Write>(w: W, demos: &DemonstrationSet) -> Result<()> {
    write_trajectories(w, demos.iter())
}

pub fn read_demonstrations<R: BufRead>(r: R) -> Result<DemonstrationSet> {
    DemonstrationSet::new(read_trajectories(r)?)
}

fn parse_record(line: &str) -> std::result::Result<Trajectory, String> {
    let mut fields = line.split_ascii_whitespace();
    let mut header = |name: &str| -> std::result::Result<usize, String> {
        fields
            .next()
            .ok_or_else(|| format!("missing {name}"))?
            .parse::<usize>()
            .map_err(|e| format!("bad {name}: {e}"))
    };
    let horizon = header("horizon")?;
    let dim = header("dimension")?;
    let coords = fields
        .map(|f| f.parse::<f64>().map_err(|e| format!("bad coordinate `{f}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let expected = (horizon + 1) * dim;
    if coords.len() != expected {
        return Err(format!(
            "expected {expected} coordinates for T={horizon}, d={dim}, found {}",
            coords.len()
        ));
    }
    Trajectory::from_flat(dim, coords).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn writes_documented_layout() {
        let t = Trajectory::new(vec![vec![0.0, 0.5], vec![0.25, -1.0]]).unwrap();
        let mut buf = Vec::new();
        write_trajectories(&mut buf, [&t]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, format!("{HEADER}\n1 2 0 0.5 0.25 -1\n"));
    }

    #[test]
    fn rejects_wrong_count() {
        let err = read_trajectories("1 2 0 0 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(read_trajectories("x 2\n".as_bytes()).is_err());
        assert!(read_trajectories("1 1 0 NaN\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn round_trips_bit_exactly(
            rows in 2usize..8,
            dim in 1usize..4,
            seed in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 32),
        ) {
            let data: Vec<f64> = seed.iter().cycle().take(rows * dim).copied().collect();
            let t = Trajectory::from_flat(dim, data).unwrap();
            let mut buf = Vec::new();
            write_trajectories(&mut buf, [&t, &t]).unwrap();
            let back = read_trajectories(buf.as_slice()).unwrap();
            prop_assert_eq!(back.len(), 2);
            for b in back {
                let same = b.as_flat().iter().zip(t.as_flat()).all(|(x, y)| x.to_bits() == y.to_bits());
                prop_assert!(same);
            }
        }
    }
}
