//! File formats. Text tables use Rust's shortest round-trip float
//! formatting, so equal numbers always produce equal bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::observables::{
    ConvergenceRecord, FragmentBlock, FragmentState, MomentumAngularDistribution, MomentumBins, MomentumDensity,
    PolarGrid,
};

use crate::thermal::Aggregate;

use super::config::MatrixFormat;

const DIST_MAGIC: &[u8; 8] = b"PDDIST01";
const DENSITY_MAGIC: &[u8; 8] = b"PDRHO001";
const FRAGMENT_MAGIC: &[u8; 8] = b"PDFRAG01";

pub const CONVERGENCE_HEADER: &str = "K,P_abs_err,P_rel_err,Ek_rel_err,dW_p,dW_theta,errbar_P,errbar_Ek";

/// Writes `bytes` to `path` through a temporary file and a rename, so a
/// crash never leaves a truncated file behind.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    {
        let file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        w.flush().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn convergence_csv(record: &ConvergenceRecord) -> String {
    let mut s = String::from(CONVERGENCE_HEADER);
    s.push('\n');
    for r in &record.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.k,
            r.p_abs_err,
            r.p_rel_err,
            opt(r.ek_rel_err),
            opt(r.dw_p),
            opt(r.dw_theta),
            r.errbar_p,
            opt(r.errbar_ek)
        );
    }
    s
}

/// One row of a per-member table.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberRow {
    pub k: usize,
    pub seed: Option<u64>,
    pub weight: f64,
    pub probability: Option<f64>,
    pub kinetic_energy: Option<f64>,
    pub status: String,
}

pub const MEMBERS_HEADER: &str = "k,seed,weight,P,Ek,status";

pub fn members_csv(rows: &[MemberRow]) -> String {
    let mut s = String::from(MEMBERS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.k,
            r.seed.map(|x| x.to_string()).unwrap_or_default(),
            r.weight,
            opt(r.probability),
            opt(r.kinetic_energy),
            r.status.replace([',', '\n'], ";")
        );
    }
    s
}

fn push_row(s: &mut String, name: &str, values: &[f64]) {
    s.push_str(name);
    for v in values {
        let _ = write!(s, " {v}");
    }
    s.push('\n');
}

pub fn distribution_bytes(d: &MomentumAngularDistribution, format: MatrixFormat) -> Vec<u8> {
    match format {
        MatrixFormat::Text => {
            let mut s = String::new();
            s.push_str("# momentum-angular distribution D(P, theta), atomic units\n");
            s.push_str("# rows: momentum bins; columns: polar nodes (rad)\n");
            let _ = writeln!(s, "n_p {}", d.n_p());
            let _ = writeln!(s, "n_theta {}", d.n_theta());
            push_row(&mut s, "p_edges", &d.p_edges);
            push_row(&mut s, "p_centers", &d.p_centers);
            push_row(&mut s, "theta_edges", &d.theta_edges);
            push_row(&mut s, "theta", &d.theta);
            s.push_str("values\n");
            for k in 0..d.n_p() {
                let row = d.angular_slice(k);
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                s.push_str(&line.join(" "));
                s.push('\n');
            }
            s.into_bytes()
        }
        MatrixFormat::Binary => {
            let mut b = Vec::with_capacity(24 + 8 * (d.values.len() + 2 * d.n_p() + 2 * d.n_theta() + 2));
            b.extend_from_slice(DIST_MAGIC);
            b.extend_from_slice(&(d.n_p() as u64).to_le_bytes());
            b.extend_from_slice(&(d.n_theta() as u64).to_le_bytes());
            for arr in [&d.p_edges, &d.p_centers, &d.theta_edges, &d.theta, &d.values] {
                put_f64s(&mut b, arr);
            }
            b
        }
    }
}

/// Reads a distribution file in either format.
pub fn read_distribution(path: impl AsRef<Path>) -> Result<MomentumAngularDistribution> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |message: String| Error::Parse {
        path: path.display().to_string(),
        message,
    };
    let (p_edges, p_centers, theta_edges, theta, values) = if bytes.starts_with(DIST_MAGIC) {
        let mut r = Reader::new(&bytes[8..]);
        let n_p = r.u64().map_err(parse_err)? as usize;
        let n_t = r.u64().map_err(parse_err)? as usize;
        (
            r.f64s(n_p + 1).map_err(parse_err)?,
            r.f64s(n_p).map_err(parse_err)?,
            r.f64s(n_t + 1).map_err(parse_err)?,
            r.f64s(n_t).map_err(parse_err)?,
            r.f64s(n_p * n_t).map_err(parse_err)?,
        )
    } else {
        let text = String::from_utf8(bytes).map_err(|_| parse_err("neither text nor a binary distribution".into()))?;
        parse_text_distribution(&text).map_err(parse_err)?
    };
    if theta.len() < 3 || p_edges.len() != p_centers.len() + 1 || theta_edges.len() != theta.len() + 1 {
        return Err(parse_err("inconsistent dimensions".into()));
    }
    let polar = PolarGrid::new(theta.len() - 1)?;
    Ok(MomentumAngularDistribution {
        p_centers,
        p_edges,
        theta,
        theta_edges,
        theta_weights: polar.weights().to_vec(),
        values,
    })
}

type Columns = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

fn parse_text_distribution(text: &str) -> std::result::Result<Columns, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#') && !l.trim().is_empty());
    let mut field = |name: &str| -> std::result::Result<(usize, Vec<f64>), String> {
        let (no, line) = lines.next().ok_or_else(|| format!("missing `{name}`"))?;
        let mut it = line.split_whitespace();
        if it.next() != Some(name) {
            return Err(format!("line {}: expected `{name}`", no + 1));
        }
        let vals = it
            .map(|t| t.parse::<f64>().map_err(|e| format!("line {}: {e}", no + 1)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok((no, vals))
    };
    let n_p = field("n_p")?.1.first().copied().unwrap_or(0.0) as usize;
    let n_t = field("n_theta")?.1.first().copied().unwrap_or(0.0) as usize;
    let p_edges = field("p_edges")?.1;
    let p_centers = field("p_centers")?.1;
    let theta_edges = field("theta_edges")?.1;
    let theta = field("theta")?.1;
    field("values")?;
    let mut values = Vec::with_capacity(n_p * n_t);
    for (no, line) in lines {
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| format!("line {}: {e}", no + 1)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if row.len() != n_t {
            return Err(format!("line {}: expected {n_t} values, got {}", no + 1, row.len()));
        }
        values.extend(row);
    }
    if values.len() != n_p * n_t || p_centers.len() != n_p || theta.len() != n_t {
        return Err(format!("expected a {n_p} x {n_t} matrix"));
    }
    Ok((p_edges, p_centers, theta_edges, theta, values))
}

fn put_f64s(b: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        b.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| "truncated file".to_string())?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn i64(&mut self) -> std::result::Result<i64, String> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> std::result::Result<Vec<f64>, String> {
        let raw = self.take(n.checked_mul(8).ok_or("size overflow")?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn complex(&mut self, n: usize) -> std::result::Result<Vec<Complex64>, String> {
        let v = self.f64s(2 * n)?;
        Ok(v.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }

    fn done(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

/// Running ensemble sums over the first `members` members.
pub fn aggregate_bytes(members: usize, a: &Aggregate) -> Vec<u8> {
    let d = &a.density;
    let mut b = Vec::new();
    b.extend_from_slice(DENSITY_MAGIC);
    b.extend_from_slice(&(members as u64).to_le_bytes());
    put_f64s(&mut b, &[a.probability, a.energy_weight, d.bins().dp()]);
    b.extend_from_slice(&(d.bins().n_points() as u64).to_le_bytes());
    b.extend_from_slice(&(d.j_max() as u64).to_le_bytes());
    b.extend_from_slice(&(d.blocks().len() as u64).to_le_bytes());
    for (m, rho) in d.blocks() {
        b.extend_from_slice(&(*m as i64).to_le_bytes());
        b.extend_from_slice(&(rho.len() as u64).to_le_bytes());
        put_f64s(&mut b, rho);
    }
    b
}

pub fn read_aggregate(path: &Path) -> Result<(usize, Aggregate)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let err = |message: String| Error::Parse {
        path: path.display().to_string(),
        message,
    };
    if !bytes.starts_with(DENSITY_MAGIC) {
        return Err(err("not an aggregate checkpoint".into()));
    }
    let mut r = Reader::new(&bytes[8..]);
    let members = r.u64().map_err(err)? as usize;
    let probability = r.f64().map_err(err)?;
    let energy_weight = r.f64().map_err(err)?;
    let dp = r.f64().map_err(err)?;
    let n_points = r.u64().map_err(err)? as usize;
    let j_max = r.u64().map_err(err)? as u32;
    let n_blocks = r.u64().map_err(err)? as usize;
    let mut blocks = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        let m = r.i64().map_err(err)? as i32;
        let len = r.u64().map_err(err)? as usize;
        blocks.push((m, r.f64s(len).map_err(err)?));
    }
    if !r.done() {
        return Err(err("trailing bytes".into()));
    }
    let density = MomentumDensity::from_blocks(MomentumBins::new(n_points, dp), j_max, blocks)?;
    Ok((
        members,
        Aggregate {
            probability,
            energy_weight,
            density,
        },
    ))
}

pub fn fragment_bytes(f: &FragmentState) -> Vec<u8> {
    let mut b = Vec::new();
    b.extend_from_slice(FRAGMENT_MAGIC);
    put_f64s(&mut b, &[f.dp(), f.reduced_mass()]);
    b.extend_from_slice(&(f.j_max() as u64).to_le_bytes());
    b.extend_from_slice(&(f.n_points() as u64).to_le_bytes());
    put_f64s(&mut b, f.momenta());
    b.extend_from_slice(&(f.blocks().len() as u64).to_le_bytes());
    for block in f.blocks() {
        b.extend_from_slice(&(block.m as i64).to_le_bytes());
        b.extend_from_slice(&(block.banked.len() as u64).to_le_bytes());
        for z in block.banked.iter().chain(&block.residue) {
            put_f64s(&mut b, &[z.re, z.im]);
        }
    }
    b
}

pub fn read_fragments(path: &Path) -> Result<FragmentState> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let err = |message: String| Error::Parse {
        path: path.display().to_string(),
        message,
    };
    if !bytes.starts_with(FRAGMENT_MAGIC) {
        return Err(err("not a fragment state".into()));
    }
    let mut r = Reader::new(&bytes[8..]);
    let dp = r.f64().map_err(err)?;
    let mass = r.f64().map_err(err)?;
    let j_max = r.u64().map_err(err)? as u32;
    let n = r.u64().map_err(err)? as usize;
    let momenta = r.f64s(n).map_err(err)?;
    let n_blocks = r.u64().map_err(err)? as usize;
    let mut blocks = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        let m = r.i64().map_err(err)? as i32;
        let len = r.u64().map_err(err)? as usize;
        let banked = r.complex(len).map_err(err)?;
        let residue = r.complex(len).map_err(err)?;
        blocks.push(FragmentBlock { m, banked, residue });
    }
    if !r.done() {
        return Err(err("trailing bytes".into()));
    }
    FragmentState::from_parts(dp, mass, j_max, momenta, blocks)
}
