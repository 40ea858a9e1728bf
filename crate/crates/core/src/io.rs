//! Containers for fields, fiber operators and sampled inverse multipliers.
//!
//! Binary layout (all little-endian): a four-byte magic (`FKSF` for fields,
//! `FKFO` for fiber operators), a `u32` version, the grid header, then the
//! complex samples as consecutive `(re, im)` `f64` pairs in row-major order.
//! Grid header: `u32` axis count, then per axis `u64` count, `f64` half-width,
//! `u8` role (0 = v, 1 = t), `u8` domain (0 = position, 1 = frequency).
//! Fiber operators store `f64` λ and the `u32` dimension `n` before a single
//! axis record shared by all `n` line axes.
//!
//! JSON containers carry the same metadata with `values` as `[re, im]` pairs.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, AxisRole, Domain, Grid};
use crate::inversion::SampledInverse;
use crate::linalg::CMatrix;
use crate::scalar::Real;
use crate::schrodinger::{FiberOperator, LineGrid};
use crate::symbolcalc::SymbolGrid;
use crate::transform::SampledField;

const FIELD_MAGIC: &[u8; 4] = b"FKSF";
const OPERATOR_MAGIC: &[u8; 4] = b"FKFO";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AxisRecord {
    pub count: usize,
    pub half_width: f64,
    pub role: AxisRole,
    pub domain: Domain,
}

impl AxisRecord {
    fn of<T: Real>(a: &Axis<T>) -> Self {
        Self { count: a.count, half_width: a.half_width.f64(), role: a.role, domain: a.domain }
    }

    fn axis<T: Real>(&self) -> Result<Axis<T>> {
        Axis::new(self.count, T::c(self.half_width), self.role, self.domain)
    }
}

fn pairs<T: Real>(v: &[Complex<T>]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re.f64(), z.im.f64()]).collect()
}

fn unpairs<T: Real>(v: &[[f64; 2]]) -> Vec<Complex<T>> {
    v.iter().map(|p| Complex::new(T::c(p[0]), T::c(p[1]))).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldJson {
    pub format: String,
    pub version: u32,
    pub axes: Vec<AxisRecord>,
    pub values: Vec<[f64; 2]>,
}

impl FieldJson {
    pub fn from_field<T: Real>(f: &SampledField<T>) -> Self {
        Self {
            format: "flagcalc-field".into(),
            version: VERSION,
            axes: f.grid().axes().iter().map(AxisRecord::of).collect(),
            values: pairs(f.values()),
        }
    }

    pub fn to_field<T: Real>(&self) -> Result<SampledField<T>> {
        if self.format != "flagcalc-field" {
            return Err(Error::Format(format!("expected a field container, found `{}`", self.format)));
        }
        let axes = self.axes.iter().map(AxisRecord::axis).collect::<Result<Vec<_>>>()?;
        SampledField::new(Grid::new(axes)?, unpairs(&self.values))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorJson {
    pub format: String,
    pub version: u32,
    pub lambda: f64,
    pub n: usize,
    pub axis: AxisRecord,
    /// Row-major action matrix (kernel times quadrature weight).
    pub values: Vec<[f64; 2]>,
}

impl OperatorJson {
    pub fn from_operator<T: Real>(a: &FiberOperator<T>) -> Self {
        Self {
            format: "flagcalc-fiber-operator".into(),
            version: VERSION,
            lambda: a.lambda().f64(),
            n: a.grid().n(),
            axis: AxisRecord::of(a.grid().axis()),
            values: pairs(a.matrix().data()),
        }
    }

    pub fn to_operator<T: Real>(&self) -> Result<FiberOperator<T>> {
        if self.format != "flagcalc-fiber-operator" {
            return Err(Error::Format(format!("expected a fiber operator container, found `{}`", self.format)));
        }
        let line = LineGrid::new(self.n, self.axis.count, T::c(self.axis.half_width))?;
        let m = line.len();
        FiberOperator::new(T::c(self.lambda), line, CMatrix::from_vec(m, m, unpairs(&self.values))?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolJson {
    pub lambda: f64,
    /// `[ξ multi-index][η multi-index]` samples.
    pub values: Vec<[f64; 2]>,
}

/// The fiber data behind a reconstructed inverse multiplier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledSpectrumJson {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub n: usize,
    pub line: AxisRecord,
    pub fibers: Vec<SymbolJson>,
}

impl SampledSpectrumJson {
    pub fn from_sampled<T: Real>(s: &SampledInverse<T>) -> Self {
        use crate::spectrum::Spectrum;
        Self {
            format: "flagcalc-sampled-spectrum".into(),
            version: VERSION,
            name: s.name().to_string(),
            n: s.line().n(),
            line: AxisRecord::of(s.line().axis()),
            fibers: s
                .symbols()
                .into_iter()
                .map(|b| SymbolJson { lambda: b.lambda().f64(), values: pairs(b.values()) })
                .collect(),
        }
    }

    pub fn to_sampled<T: Real>(&self) -> Result<SampledInverse<T>> {
        if self.format != "flagcalc-sampled-spectrum" {
            return Err(Error::Format(format!("expected a sampled spectrum, found `{}`", self.format)));
        }
        if self.fibers.is_empty() {
            return Err(Error::Format("sampled spectrum without fibers".into()));
        }
        let line = LineGrid::new(self.n, self.line.count, T::c(self.line.half_width))?;
        let symbols = self
            .fibers
            .iter()
            .map(|f| SymbolGrid::new(T::c(f.lambda), line.clone(), unpairs(&f.values)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SampledInverse::new(&self.name, symbols))
    }
}

fn put_axis<W: Write>(w: &mut W, a: &AxisRecord) -> Result<()> {
    w.write_all(&(a.count as u64).to_le_bytes())?;
    w.write_all(&a.half_width.to_le_bytes())?;
    w.write_all(&[match a.role {
        AxisRole::V => 0,
        AxisRole::T => 1,
    }])?;
    w.write_all(&[match a.domain {
        Domain::Position => 0,
        Domain::Frequency => 1,
    }])?;
    Ok(())
}

fn put_values<W: Write, T: Real>(w: &mut W, v: &[Complex<T>]) -> Result<()> {
    for z in v {
        w.write_all(&z.re.f64().to_le_bytes())?;
        w.write_all(&z.im.f64().to_le_bytes())?;
    }
    Ok(())
}

fn get<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| Error::Format(format!("truncated container: {e}")))?;
    Ok(b)
}

fn get_axis<R: Read>(r: &mut R) -> Result<AxisRecord> {
    let count = u64::from_le_bytes(get::<8, _>(r)?) as usize;
    let half_width = f64::from_le_bytes(get::<8, _>(r)?);
    let role = match get::<1, _>(r)?[0] {
        0 => AxisRole::V,
        1 => AxisRole::T,
        x => return Err(Error::Format(format!("bad axis role tag {x}"))),
    };
    let domain = match get::<1, _>(r)?[0] {
        0 => Domain::Position,
        1 => Domain::Frequency,
        x => return Err(Error::Format(format!("bad axis domain tag {x}"))),
    };
    Ok(AxisRecord { count, half_width, role, domain })
}

fn get_values<R: Read, T: Real>(r: &mut R, len: usize) -> Result<Vec<Complex<T>>> {
    (0..len)
        .map(|_| {
            let re = f64::from_le_bytes(get::<8, _>(r)?);
            let im = f64::from_le_bytes(get::<8, _>(r)?);
            Ok(Complex::new(T::c(re), T::c(im)))
        })
        .collect()
}

fn check_header<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<()> {
    let m = get::<4, _>(r)?;
    if &m != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&m),
            String::from_utf8_lossy(magic)
        )));
    }
    let v = u32::from_le_bytes(get::<4, _>(r)?);
    if v != VERSION {
        return Err(Error::Format(format!("unsupported container version {v}")));
    }
    Ok(())
}

pub fn write_field_binary<W: Write, T: Real>(w: &mut W, f: &SampledField<T>) -> Result<()> {
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let axes = f.grid().axes();
    w.write_all(&(axes.len() as u32).to_le_bytes())?;
    for a in axes {
        put_axis(w, &AxisRecord::of(a))?;
    }
    put_values(w, f.values())
}

pub fn read_field_binary<R: Read, T: Real>(r: &mut R) -> Result<SampledField<T>> {
    check_header(r, FIELD_MAGIC)?;
    let ndim = u32::from_le_bytes(get::<4, _>(r)?) as usize;
    if ndim == 0 || ndim > 64 {
        return Err(Error::Format(format!("implausible axis count {ndim}")));
    }
    let axes = (0..ndim).map(|_| get_axis(r)?.axis()).collect::<Result<Vec<Axis<T>>>>()?;
    let grid = Grid::new(axes)?;
    let values = get_values(r, grid.len())?;
    SampledField::new(grid, values)
}

pub fn write_operator_binary<W: Write, T: Real>(w: &mut W, a: &FiberOperator<T>) -> Result<()> {
    w.write_all(OPERATOR_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&a.lambda().f64().to_le_bytes())?;
    w.write_all(&(a.grid().n() as u32).to_le_bytes())?;
    put_axis(w, &AxisRecord::of(a.grid().axis()))?;
    put_values(w, a.matrix().data())
}

pub fn read_operator_binary<R: Read, T: Real>(r: &mut R) -> Result<FiberOperator<T>> {
    check_header(r, OPERATOR_MAGIC)?;
    let lambda = f64::from_le_bytes(get::<8, _>(r)?);
    let n = u32::from_le_bytes(get::<4, _>(r)?) as usize;
    let axis = get_axis(r)?;
    let line = LineGrid::new(n, axis.count, T::c(axis.half_width))?;
    let m = line.len();
    let values = get_values(r, m * m)?;
    FiberOperator::new(T::c(lambda), line, CMatrix::from_vec(m, m, values)?)
}

pub fn save_field<T: Real>(path: &Path, f: &SampledField<T>) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::to_writer(&mut file, &FieldJson::from_field(f))?;
    } else {
        write_field_binary(&mut file, f)?;
    }
    file.flush()?;
    Ok(())
}

pub fn load_field<T: Real>(path: &Path) -> Result<SampledField<T>> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    if path.extension().is_some_and(|e| e == "json") {
        let j: FieldJson = serde_json::from_reader(file)?;
        j.to_field()
    } else {
        read_field_binary(&mut file)
    }
}

pub fn save_operator<T: Real>(path: &Path, a: &FiberOperator<T>) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::to_writer(&mut file, &OperatorJson::from_operator(a))?;
    } else {
        write_operator_binary(&mut file, a)?;
    }
    file.flush()?;
    Ok(())
}

pub fn load_operator<T: Real>(path: &Path) -> Result<FiberOperator<T>> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    if path.extension().is_some_and(|e| e == "json") {
        let j: OperatorJson = serde_json::from_reader(file)?;
        j.to_operator()
    } else {
        read_operator_binary(&mut file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::expi2pi;
    use crate::spectrum::Spectrum;

    type C = Complex<f64>;

    fn field() -> SampledField<f64> {
        let g = Grid::heisenberg(1, 8, 2.0, 4, 1.5).unwrap();
        SampledField::from_fn(g, |p| C::new(p[0] - p[2], p[1] * p[1]) * expi2pi(0.1 * p[2]))
    }

    #[test]
    fn field_binary_round_trip_is_bit_exact() {
        let f = field();
        let mut buf = Vec::new();
        write_field_binary(&mut buf, &f).unwrap();
        assert_eq!(&buf[..4], b"FKSF");
        assert_eq!(buf.len(), 4 + 4 + 4 + 3 * 18 + 16 * f.values().len());
        let g: SampledField<f64> = read_field_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(f, g);
        let dual = crate::transform::fourier(&f).unwrap();
        let mut buf = Vec::new();
        write_field_binary(&mut buf, &dual).unwrap();
        let back: SampledField<f64> = read_field_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back, dual);
    }

    #[test]
    fn corrupt_containers_are_rejected() {
        let mut buf = Vec::new();
        write_field_binary(&mut buf, &field()).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_field_binary::<_, f64>(&mut bad.as_slice()), Err(Error::Format(_))));
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_field_binary::<_, f64>(&mut buf.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn json_and_files() {
        let dir = tempfile::tempdir().unwrap();
        let f = field();
        for name in ["f.json", "f.bin"] {
            let p = dir.path().join(name);
            save_field(&p, &f).unwrap();
            let g: SampledField<f64> = load_field(&p).unwrap();
            assert_eq!(f, g);
        }
        let line = LineGrid::new(1, 8, 2.0).unwrap();
        let m = CMatrix::from_fn(8, 8, |j, k| C::new(j as f64, -(k as f64) / 3.0));
        let a = FiberOperator::new(-0.75, line, m).unwrap();
        for name in ["a.json", "a.fkfo"] {
            let p = dir.path().join(name);
            save_operator(&p, &a).unwrap();
            let b: FiberOperator<f64> = load_operator(&p).unwrap();
            assert_eq!(b.lambda(), -0.75);
            assert_eq!(b.matrix().data(), a.matrix().data());
        }
    }

    #[test]
    fn sampled_spectrum_round_trip() {
        let line = LineGrid::new(1, 16, 2.0).unwrap();
        let mk = |l: f64| SymbolGrid::from_fn(l, line.clone(), |x, e| C::new(1.0 + x[0] * e[0], l)).unwrap();
        let s = SampledInverse::new("t", vec![mk(-1.0), mk(1.0), mk(2.0)]);
        let j = SampledSpectrumJson::from_sampled(&s);
        let text = serde_json::to_string(&j).unwrap();
        let back: SampledInverse<f64> = serde_json::from_str::<SampledSpectrumJson>(&text).unwrap().to_sampled().unwrap();
        for (w, l) in [([0.1, 0.2], -1.0), ([0.3, -0.1], 1.5)] {
            assert_eq!(s.eval(&w, l), back.eval(&w, l));
        }
    }

    #[test]
    fn f32_fields_load_from_f64_containers() {
        let f = field();
        let mut buf = Vec::new();
        write_field_binary(&mut buf, &f).unwrap();
        let g: SampledField<f32> = read_field_binary(&mut buf.as_slice()).unwrap();
        assert!((g.values()[5].re as f64 - f.values()[5].re).abs() < 1e-6);
    }
}
