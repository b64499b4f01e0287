//! Binary vorticity snapshots.
//!
//! Layout: `OSN1`, then little-endian `u32 n_s`, `u32 n_theta`, `f64 r_wall`,
//! `f64 s_max`, `f64 t`, `f64 gamma_infinity` and the vorticity values in
//! radial-major order.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::elliptic::{ModalWorkspace, StreamBoundary};
use crate::error::{Error, Result};
use crate::evolve::State;
use crate::fields::ScalarField;
use crate::geometry::Grid;

pub const MAGIC: &[u8; 4] = b"OSN1";
const HEADER_LEN: usize = 4 + 4 + 4 + 8 * 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n_s: usize,
    pub n_theta: usize,
    pub r_wall: f64,
    pub s_max: f64,
    pub t: f64,
    pub gamma_infinity: f64,
    pub omega: Vec<f64>,
}

impl Snapshot {
    pub fn of_state(state: &State) -> Self {
        let g = state.grid();
        Snapshot {
            n_s: g.n_s(),
            n_theta: g.n_theta(),
            r_wall: g.r_wall(),
            s_max: g.s_max(),
            t: state.t(),
            gamma_infinity: state.gamma_infinity(),
            omega: state.omega().values().to_vec(),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.r_wall, self.s_max, self.n_s, self.n_theta)
    }

    /// Rebuilds a no-slip state, recomputing the streamfunction and velocity.
    pub fn to_state(&self, ws: &mut ModalWorkspace) -> Result<State> {
        let grid: &Arc<Grid> = ws.grid();
        if self.grid()? != **grid {
            return Err(Error::GridMismatch);
        }
        let omega = ScalarField::from_values(&grid.clone(), self.omega.clone())?;
        State::from_vorticity(
            ws,
            self.t,
            omega,
            self.gamma_infinity,
            &StreamBoundary::Circulation(self.gamma_infinity),
        )
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        if self.omega.len() != self.n_s * self.n_theta {
            return Err(Error::Snapshot(format!(
                "{} values for a {}x{} grid",
                self.omega.len(),
                self.n_s,
                self.n_theta
            )));
        }
        let dims = |n: usize| {
            u32::try_from(n).map_err(|_| Error::Snapshot(format!("dimension {n} does not fit in u32")))
        };
        let mut buf = Vec::with_capacity(HEADER_LEN + 8 * self.omega.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&dims(self.n_s)?.to_le_bytes());
        buf.extend_from_slice(&dims(self.n_theta)?.to_le_bytes());
        for v in [self.r_wall, self.s_max, self.t, self.gamma_infinity] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.omega {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::Snapshot(format!("truncated header ({} bytes)", bytes.len())));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let (n_s, n_theta) = (u32_at(4), u32_at(8));
        let count = n_s
            .checked_mul(n_theta)
            .ok_or_else(|| Error::Snapshot("grid size overflows".into()))?;
        let expected = count
            .checked_mul(8)
            .and_then(|b| b.checked_add(HEADER_LEN))
            .ok_or_else(|| Error::Snapshot("grid size overflows".into()))?;
        if bytes.len() != expected {
            return Err(Error::Snapshot(format!(
                "payload is {} bytes, expected {expected}",
                bytes.len()
            )));
        }
        let omega = (0..count).map(|k| f64_at(HEADER_LEN + 8 * k)).collect();
        Ok(Snapshot {
            n_s,
            n_theta,
            r_wall: f64_at(12),
            s_max: f64_at(20),
            t: f64_at(28),
            gamma_infinity: f64_at(36),
            omega,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        Snapshot {
            n_s: 3,
            n_theta: 2,
            r_wall: 1.0,
            s_max: 2.5,
            t: 0.125,
            gamma_infinity: -0.1,
            omega: vec![1.0, -2.0, 3.5, 0.0, f64::MIN_POSITIVE, 6.0],
        }
    }

    #[test]
    fn byte_layout() {
        let mut buf = Vec::new();
        sample().write(&mut buf).unwrap();
        assert_eq!(buf.len(), 44 + 48);
        assert_eq!(&buf[..4], b"OSN1");
        assert_eq!(&buf[4..8], &[3, 0, 0, 0]);
        assert_eq!(&buf[8..12], &[2, 0, 0, 0]);
        assert_eq!(&buf[12..20], &1.0f64.to_le_bytes());
        assert_eq!(&buf[44..52], &1.0f64.to_le_bytes());
        assert_eq!(Snapshot::read(&buf[..]).unwrap(), sample());
    }

    #[test]
    fn rejects_bad_input() {
        let mut buf = Vec::new();
        sample().write(&mut buf).unwrap();
        let mut wrong = buf.clone();
        wrong[3] = b'2';
        assert!(matches!(Snapshot::from_bytes(&wrong), Err(Error::Snapshot(_))));
        for cut in [0, 3, 20, buf.len() - 1] {
            assert!(Snapshot::from_bytes(&buf[..cut]).is_err(), "{cut}");
        }
        let mut long = buf.clone();
        long.push(0);
        assert!(Snapshot::from_bytes(&long).is_err());
        let mut s = sample();
        s.omega.pop();
        assert!(s.write(Vec::new()).is_err());
    }
}
