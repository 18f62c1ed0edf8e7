//! Binary container for fields and trajectories.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic      8 bytes  "CRITNLS\0"
//! version    u16      1
//! kind       u8       0 = field, 1 = trajectory
//! repr       u8       0 = physical, 1 = frequency
//! dim        u32
//! mode       u8       0 = full tensor, 1 = radial
//! extent     f64      L or R
//! points     u64      per axis, or radial count
//! slices     u64      1 for a field
//! t0, t1     f64      0, 0 for a field
//! payload    slices * samples * (re f64, im f64)
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use super::field::{Field, Repr};
use super::grid::{Grid, GridMode, GridSpec};
use super::trajectory::{time_lattice, Trajectory};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"CRITNLS\0";
const VERSION: u16 = 1;

struct Header {
    trajectory: bool,
    repr: Repr,
    spec: GridSpec,
    slices: u64,
    t0: f64,
    t1: f64,
}

fn write_header(w: &mut impl Write, h: &Header) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u16::<LE>(VERSION)?;
    w.write_u8(h.trajectory as u8)?;
    w.write_u8(match h.repr {
        Repr::Physical => 0,
        Repr::Frequency => 1,
    })?;
    w.write_u32::<LE>(h.spec.dim as u32)?;
    w.write_u8(match h.spec.mode {
        GridMode::FullTensor => 0,
        GridMode::Radial => 1,
    })?;
    w.write_f64::<LE>(h.spec.extent)?;
    w.write_u64::<LE>(h.spec.points as u64)?;
    w.write_u64::<LE>(h.slices)?;
    w.write_f64::<LE>(h.t0)?;
    w.write_f64::<LE>(h.t1)?;
    Ok(())
}

fn read_header(r: &mut impl Read) -> Result<Header> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.read_u16::<LE>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let trajectory = match r.read_u8()? {
        0 => false,
        1 => true,
        k => return Err(Error::Format(format!("unknown kind {k}"))),
    };
    let repr = match r.read_u8()? {
        0 => Repr::Physical,
        1 => Repr::Frequency,
        k => return Err(Error::Format(format!("unknown representation {k}"))),
    };
    let dim = r.read_u32::<LE>()? as usize;
    let mode = match r.read_u8()? {
        0 => GridMode::FullTensor,
        1 => GridMode::Radial,
        k => return Err(Error::Format(format!("unknown grid mode {k}"))),
    };
    let extent = r.read_f64::<LE>()?;
    let points = r.read_u64::<LE>()? as usize;
    let slices = r.read_u64::<LE>()?;
    let t0 = r.read_f64::<LE>()?;
    let t1 = r.read_f64::<LE>()?;
    Ok(Header { trajectory, repr, spec: GridSpec { dim, mode, extent, points }, slices, t0, t1 })
}

fn write_samples(w: &mut impl Write, data: &[Complex64]) -> Result<()> {
    for z in data {
        w.write_f64::<LE>(z.re)?;
        w.write_f64::<LE>(z.im)?;
    }
    Ok(())
}

fn read_samples(r: &mut impl Read, count: usize) -> Result<Vec<Complex64>> {
    (0..count).map(|_| Ok(Complex64::new(r.read_f64::<LE>()?, r.read_f64::<LE>()?))).collect()
}

pub fn write_field(w: &mut impl Write, f: &Field) -> Result<()> {
    let h = Header { trajectory: false, repr: f.repr(), spec: *f.grid().spec(), slices: 1, t0: 0.0, t1: 0.0 };
    write_header(w, &h)?;
    write_samples(w, f.samples())
}

pub fn read_field(r: &mut impl Read) -> Result<Field> {
    let h = read_header(r)?;
    if h.trajectory {
        return Err(Error::Format("container holds a trajectory, not a field".into()));
    }
    let grid = Grid::new(h.spec)?;
    let data = read_samples(r, grid.len())?;
    Field::new(&grid, h.repr, data)
}

pub fn write_trajectory(w: &mut impl Write, u: &Trajectory) -> Result<()> {
    let (t0, t1) = u.interval();
    let h = Header { trajectory: true, repr: Repr::Physical, spec: *u.grid().spec(), slices: u.len() as u64, t0, t1 };
    write_header(w, &h)?;
    for s in u.slices() {
        write_samples(w, s.samples())?;
    }
    Ok(())
}

pub fn read_trajectory(r: &mut impl Read) -> Result<Trajectory> {
    let h = read_header(r)?;
    if !h.trajectory {
        return Err(Error::Format("container holds a field, not a trajectory".into()));
    }
    if h.slices < 2 || h.slices > 1 << 24 {
        return Err(Error::Format(format!("implausible slice count {}", h.slices)));
    }
    let grid = Grid::new(h.spec)?;
    let slices = (0..h.slices).map(|_| Field::new(&grid, h.repr, read_samples(r, grid.len())?)).collect::<Result<Vec<_>>>()?;
    Trajectory::new(time_lattice(h.t0, h.t1, slices.len() - 1), slices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip_is_lossless() {
        let g = Grid::full_tensor(3, 7.25, 8).unwrap();
        let f = Field::from_fn(&g, |x| Complex64::new(x[0].sin() / 3.0, x[1] * x[2] + 1e-300)).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), 8 + 2 + 1 + 1 + 4 + 1 + 8 + 8 + 8 + 16 + 512 * 16);
        let back = read_field(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn trajectory_round_trip_is_lossless() {
        let g = Grid::radial(7, 11.0, 32).unwrap();
        let u = Trajectory::from_fn(0.1, 0.4, 3, |t| Field::from_radial(&g, |r| Complex64::new((-r * r).exp() * t, t / 7.0))).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &u).unwrap();
        let back = read_trajectory(&mut buf.as_slice()).unwrap();
        assert_eq!(back, u);
        assert!(read_field(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn rejects_garbage() {
        let mut bytes = b"NOTMAGIC".to_vec();
        bytes.extend_from_slice(&[0; 64]);
        assert!(matches!(read_field(&mut bytes.as_slice()), Err(Error::Format(_))));
        assert!(read_field(&mut &b"CRIT"[..]).is_err());
    }
}
