//! Simulated sample paths and their on-disk formats.
//!
//! CSV: optional `# key=value` comment lines, a `t,value` header, then one
//! row per grid point.
//!
//! Raw: a 40-byte little-endian header followed by the samples as `f64`:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 8    | magic `BSSTRJ01`                        |
//! | 8      | 8    | `n`: number of steps (`u64`)            |
//! | 16     | 8    | `T`: time of the last sample (`f64`)    |
//! | 24     | 8    | seed (`u64`)                            |
//! | 32     | 1    | label (0 = BSS, 1 = TBSS, 2 = Exact)    |
//! | 33     | 7    | zero padding                            |
//! | 40     | 8(n+1) | samples                               |
//!
//! The grid is `t_i = i·T/n`, `i = 0..=n`.

use std::io::{self, Read, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryLabel {
    Bss,
    Tbss,
    Exact,
}

impl TrajectoryLabel {
    pub fn name(self) -> &'static str {
        match self {
            TrajectoryLabel::Bss => "BSS",
            TrajectoryLabel::Tbss => "TBSS",
            TrajectoryLabel::Exact => "Exact",
        }
    }

    fn code(self) -> u8 {
        match self {
            TrajectoryLabel::Bss => 0,
            TrajectoryLabel::Tbss => 1,
            TrajectoryLabel::Exact => 2,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(TrajectoryLabel::Bss),
            1 => Some(TrajectoryLabel::Tbss),
            2 => Some(TrajectoryLabel::Exact),
            _ => None,
        }
    }
}

/// Equidistant samples `values[i]` at times `t0 + i·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub values: Vec<f64>,
    pub t0: f64,
    pub dt: f64,
    pub seed: u64,
    pub label: TrajectoryLabel,
}

const MAGIC: &[u8; 8] = b"BSSTRJ01";

impl Trajectory {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.t0 + i as f64 * self.dt)
    }

    pub fn steps(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Rescales the samples by `1/√variance`.
    pub fn normalize(&mut self, variance: f64) {
        let s = variance.sqrt().recip();
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[(String, String)]) -> io::Result<()> {
        for (k, v) in comments {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "t,value")?;
        for (t, v) in self.times().zip(&self.values) {
            writeln!(w, "{t},{v}")?;
        }
        Ok(())
    }

    pub fn write_raw<W: Write>(&self, mut w: W) -> io::Result<()> {
        let steps = self.steps() as u64;
        let horizon = self.t0 + self.dt * steps as f64;
        w.write_all(MAGIC)?;
        w.write_all(&steps.to_le_bytes())?;
        w.write_all(&horizon.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        let mut tag = [0u8; 8];
        tag[0] = self.label.code();
        w.write_all(&tag)?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_raw<R: Read>(mut r: R) -> io::Result<Self> {
        let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        if &word != MAGIC {
            return Err(bad("not a raw trajectory file"));
        }
        r.read_exact(&mut word)?;
        let steps = u64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let horizon = f64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let seed = u64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let label = TrajectoryLabel::from_code(word[0]).ok_or_else(|| bad("unknown label"))?;
        let mut values = Vec::with_capacity(steps as usize + 1);
        for _ in 0..=steps {
            r.read_exact(&mut word)?;
            values.push(f64::from_le_bytes(word));
        }
        let dt = if steps == 0 { 0.0 } else { horizon / steps as f64 };
        Ok(Self {
            values,
            t0: 0.0,
            dt,
            seed,
            label,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trajectory {
        Trajectory {
            values: vec![0.0, 1.5, -2.25, 3.125],
            t0: 0.0,
            dt: 0.25,
            seed: 42,
            label: TrajectoryLabel::Tbss,
        }
    }

    #[test]
    fn raw_round_trip() {
        let tr = sample();
        let mut buf = Vec::new();
        tr.write_raw(&mut buf).unwrap();
        assert_eq!(buf.len(), 40 + 8 * 4);
        let back = Trajectory::read_raw(buf.as_slice()).unwrap();
        assert_eq!(back, tr);
        assert!(Trajectory::read_raw(&b"garbage!"[..]).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf, &[("seed".into(), "42".into())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# seed=42");
        assert_eq!(lines[1], "t,value");
        assert_eq!(lines[3], "0.25,1.5");
        assert_eq!(lines.len(), 6);
    }
}
