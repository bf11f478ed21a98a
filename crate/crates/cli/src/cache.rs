//! Binary cache of kernel tables.
//!
//! Little-endian layout:
//!
//! ```text
//! magic "BNEKTAB\0" | version u32 | dim u32 | n u32 | count_p u32 | m1 u32 | m2 u32
//! L f64 | trunc_ratio f64 | R f64 | weight_c f64 | gamma f64 | c_phi f64
//! id_len u32 | id bytes (utf-8)
//! alpha: count_p × n^dim f64 | alpha_prime: count_p × n^dim f64
//! ```
//!
//! Files are keyed by `(dim, n, R, kernel id, M)` and `C_Φ` through
//! [`cache_file_name`]. `beta_diag` is recomputed on load.

use std::fs;
use std::path::{Path, PathBuf};

use bne_core::grid::{build_grid, GridSpec};
use bne_core::kernel::{KernelKind, KernelTable};

use crate::config::{KernelSpec, SimConfig};
use crate::run::RunError;

const MAGIC: &[u8; 8] = b"BNEKTAB\0";
const VERSION: u32 = 1;

pub fn cache_file_name(grid: &GridSpec, kernel_id: &str, nodes: (usize, usize), c_phi: f64) -> String {
    format!(
        "{}d-n{}-R{:016x}-{kernel_id}-m{}x{}-c{:016x}.bnek",
        grid.dim,
        grid.n,
        grid.trunc_r.to_bits(),
        nodes.0,
        nodes.1,
        c_phi.to_bits()
    )
}

fn table_file_name(t: &KernelTable) -> String {
    cache_file_name(&t.grid, &t.kind.id(), t.nodes, t.c_phi)
}

pub fn encode(table: &KernelTable) -> Vec<u8> {
    let g = &table.grid;
    let mut b = Vec::with_capacity(128 + 16 * table.count_p() * g.len());
    b.extend_from_slice(MAGIC);
    for x in [
        VERSION,
        g.dim as u32,
        g.n as u32,
        table.count_p() as u32,
        table.nodes.0 as u32,
        table.nodes.1 as u32,
    ] {
        b.extend_from_slice(&x.to_le_bytes());
    }
    for x in [g.half_width_l, g.trunc_ratio, g.trunc_r, table.weight_c, table.gamma, table.c_phi] {
        b.extend_from_slice(&x.to_le_bytes());
    }
    let id = table.kind.id();
    b.extend_from_slice(&(id.len() as u32).to_le_bytes());
    b.extend_from_slice(id.as_bytes());
    for mode in table.alpha.iter().chain(&table.alpha_prime) {
        for x in mode {
            b.extend_from_slice(&x.to_le_bytes());
        }
    }
    b
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or("truncated file")?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

fn parse_kind(id: &str) -> Result<KernelKind, String> {
    Ok(match id {
        "maxwell2d" => KernelKind::Maxwell2d,
        "maxwell2d-sym" => KernelKind::Maxwell2dSymmetric,
        "hardsphere3d" => KernelKind::HardSphere3d,
        other => {
            let rest = other.strip_prefix("quad-").ok_or_else(|| format!("unknown kernel id '{other}'"))?;
            let (label, order) = rest.rsplit_once('-').ok_or_else(|| format!("malformed kernel id '{other}'"))?;
            let order = order.parse().map_err(|_| format!("malformed kernel id '{other}'"))?;
            KernelKind::Quadrature { label: label.to_string(), order }
        }
    })
}

pub fn decode(bytes: &[u8]) -> Result<KernelTable, String> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err("not a kernel table file".into());
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(format!("unsupported cache version {version}"));
    }
    let dim = r.u32()? as usize;
    let n = r.u32()? as usize;
    let count_p = r.u32()? as usize;
    let nodes = (r.u32()? as usize, r.u32()? as usize);
    let l = r.f64()?;
    let trunc_ratio = r.f64()?;
    let trunc_r = r.f64()?;
    let weight_c = r.f64()?;
    let gamma = r.f64()?;
    let c_phi = r.f64()?;
    let id_len = r.u32()? as usize;
    let id = std::str::from_utf8(r.take(id_len)?).map_err(|_| "kernel id is not utf-8")?.to_string();
    let grid: GridSpec = build_grid(dim, n, l, trunc_ratio).map_err(|e| e.to_string())?;
    if grid.trunc_r.to_bits() != trunc_r.to_bits() {
        return Err("stored truncation radius does not match the grid".into());
    }
    let len = grid.len();
    let read_modes = |r: &mut Reader| -> Result<Vec<Vec<f64>>, String> {
        (0..count_p).map(|_| (0..len).map(|_| r.f64()).collect()).collect()
    };
    let alpha = read_modes(&mut r)?;
    let alpha_prime = read_modes(&mut r)?;
    if r.pos != bytes.len() {
        return Err("trailing bytes after the tables".into());
    }
    let mut table = KernelTable {
        grid,
        kind: parse_kind(&id)?,
        weight_c,
        nodes,
        gamma,
        c_phi,
        alpha,
        alpha_prime,
        beta_diag: Vec::new(),
    };
    table.beta_diag = (0..len).map(|l| table.beta(l, l)).collect();
    Ok(table)
}

pub fn store(dir: &Path, table: &KernelTable) -> Result<PathBuf, RunError> {
    let path = dir.join(table_file_name(table));
    fs::create_dir_all(dir).map_err(|e| RunError::Io { path: dir.display().to_string(), source: e })?;
    fs::write(&path, encode(table)).map_err(|e| RunError::Io { path: path.display().to_string(), source: e })?;
    Ok(path)
}

pub fn load(path: &Path) -> Result<KernelTable, RunError> {
    let bytes = fs::read(path).map_err(|e| RunError::Io { path: path.display().to_string(), source: e })?;
    decode(&bytes).map_err(|msg| RunError::Numerical(format!("{}: {msg}", path.display())))
}

/// Table for `config` on `grid`, loaded from `dir` when present and built
/// (then stored) otherwise. Returns the table and whether it was loaded.
pub fn cached_table(config: &SimConfig, grid: &GridSpec, dir: &Path) -> Result<(KernelTable, bool), RunError> {
    let (id, c_phi) = match config.kernel {
        KernelSpec::Maxwell2d => ("maxwell2d".to_string(), config.c_phi),
        KernelSpec::Hardsphere3d => ("hardsphere3d".to_string(), config.c_phi),
        KernelSpec::Vhs { gamma, c_phi } => (format!("quad-vhs{gamma}-{c_phi}-{}", config.quad_order), c_phi),
    };
    let nodes = if config.dim == 2 { (config.m, 0) } else { (config.m1, config.m2) };
    let path = dir.join(cache_file_name(grid, &id, nodes, c_phi));
    if path.exists() {
        let t = load(&path)?;
        if &t.grid == grid {
            return Ok((t, true));
        }
    }
    let t = config.build_table(grid).map_err(RunError::num)?;
    store(dir, &t)?;
    Ok((t, false))
}
