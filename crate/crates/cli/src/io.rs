//! File loading, lattice and region parsing, JSON output.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use frustfree_core::format::{ModelFile, ObservableFile, RegionFile};
use frustfree_core::lattice::{index, Lattice};
use frustfree_core::Hamiltonian;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_model_file(path: &Path) -> Result<ModelFile> {
    ModelFile::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

pub fn load_model(path: &Path) -> Result<Hamiltonian> {
    let file = load_model_file(path)?;
    Hamiltonian::from_model(&file).with_context(|| format!("loading {}", path.display()))
}

pub fn load_observable(path: &Path) -> Result<ObservableFile> {
    ObservableFile::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

pub fn load_region(path: &Path, h: &Hamiltonian) -> Result<BTreeSet<usize>> {
    let region = RegionFile::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    region
        .vertices()
        .iter()
        .map(|label| Ok(h.index_of(label)?))
        .collect()
}

fn parse_list(text: &str) -> Result<Vec<usize>> {
    text.split([',', 'x'])
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad integer {s:?}")))
        .collect()
}

/// Box `lo:hi` of a grid with `shape`, as positions in the model's vertex list.
pub fn rect_region(rect: &str, shape: &str, h: &Hamiltonian) -> Result<BTreeSet<usize>> {
    let shape = parse_list(shape)?;
    let Some((lo, hi)) = rect.split_once(':') else {
        bail!("rectangle must look like lo:hi, got {rect:?}");
    };
    let (lo, hi) = (parse_list(lo)?, parse_list(hi)?);
    if lo.len() != shape.len() || hi.len() != shape.len() {
        bail!("rectangle corners need {} coordinates", shape.len());
    }
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        bail!("rectangle corner {lo:?} exceeds {hi:?}");
    }
    let n: usize = shape.iter().product();
    if n != h.n_spins() {
        bail!("shape {shape:?} has {n} sites but the model has {} vertices", h.n_spins());
    }
    let mut out = BTreeSet::new();
    let mut coords = lo.clone();
    loop {
        if coords.iter().zip(&shape).any(|(c, s)| c >= s) {
            bail!("rectangle {rect:?} leaves the grid");
        }
        out.insert(index(&coords, &shape));
        let mut axis = 0;
        loop {
            if axis == coords.len() {
                return Ok(out);
            }
            if coords[axis] < hi[axis] {
                coords[axis] += 1;
                break;
            }
            coords[axis] = lo[axis];
            axis += 1;
        }
    }
}

pub fn parse_lattice(spec: &str) -> Result<Lattice> {
    let Some((kind, size)) = spec.split_once(':') else {
        bail!("lattice must look like kind:size, got {spec:?}");
    };
    let dims = parse_list(size)?;
    let single = || -> Result<usize> {
        match dims[..] {
            [n] if n >= 2 => Ok(n),
            _ => bail!("{kind} needs one size of at least 2"),
        }
    };
    Ok(match kind {
        "chain" => Lattice::chain(single()?),
        "cycle" => Lattice::cycle(single()?),
        "complete" => Lattice::complete(single()?),
        "grid" if !dims.is_empty() && dims.iter().all(|&d| d >= 1) => Lattice::grid(&dims, false),
        _ => bail!("unknown lattice {spec:?}"),
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

/// Writes `text` to `path`, or to standard output.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
