//! Polyhedron sources, tetrahedron parameters and move scripts.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use hypervol::catalog::{self, CatalogEntry};
use hypervol::graph::{Move, PlanarTrivalentGraph, PolyhedronFile};
use hypervol::tetra::EdgeParameter;

use crate::error::CliError;

pub const CATALOG_DIR_VAR: &str = "HYPERVOL_CATALOG_DIR";

pub struct Loaded {
    pub name: String,
    pub graph: PlanarTrivalentGraph,
    pub expected_volume: Option<f64>,
}

fn catalog_dir() -> Option<PathBuf> {
    std::env::var_os(CATALOG_DIR_VAR).map(PathBuf::from)
}

/// A JSON document holding either a catalog entry or a bare polyhedron.
fn parse_entry(text: &str, fallback_name: &str) -> Result<CatalogEntry, CliError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("polyhedron").is_some() {
        Ok(serde_json::from_value(value)?)
    } else {
        let polyhedron: PolyhedronFile = serde_json::from_value(value)?;
        Ok(CatalogEntry {
            name: polyhedron
                .name
                .clone()
                .unwrap_or_else(|| fallback_name.to_string()),
            polyhedron,
            expected_volume: None,
            notes: String::new(),
        })
    }
}

fn read_entry(path: &Path) -> Result<CatalogEntry, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("polyhedron");
    parse_entry(&text, stem)
}

/// Entries in the override directory, keyed by file stem.
fn directory_entries() -> Result<BTreeMap<String, CatalogEntry>, CliError> {
    let mut out = BTreeMap::new();
    let Some(dir) = catalog_dir() else {
        return Ok(out);
    };
    let listing = fs::read_dir(&dir)
        .map_err(|e| CliError::validation(format!("{CATALOG_DIR_VAR}={}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = listing
        .filter_map(|d| d.ok().map(|d| d.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    for p in paths {
        let stem = p
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let mut entry = read_entry(&p)?;
        entry.name = stem.clone();
        out.insert(stem, entry);
    }
    Ok(out)
}

/// Bundled entries with the override directory applied on top.
pub fn catalog_entries() -> Result<Vec<CatalogEntry>, CliError> {
    let mut entries = catalog::catalog();
    for (stem, entry) in directory_entries()? {
        match entries.iter_mut().find(|e| e.name == stem) {
            Some(slot) => *slot = entry,
            None => entries.push(entry),
        }
    }
    Ok(entries)
}

fn find_entry(source: &str) -> Result<CatalogEntry, CliError> {
    if let Some(dir) = catalog_dir() {
        let p = dir.join(format!("{source}.json"));
        if p.is_file() {
            let mut entry = read_entry(&p)?;
            entry.name = source.to_string();
            return Ok(entry);
        }
    }
    let path = Path::new(source);
    if path.is_file() {
        return read_entry(path);
    }
    Ok(catalog::lookup(source)?)
}

/// Resolves a catalog name (override directory first) or a path to a JSON file.
pub fn load_polyhedron(source: &str) -> Result<Loaded, CliError> {
    let entry = find_entry(source)?;
    let graph = PlanarTrivalentGraph::from_file(&entry.polyhedron)?;
    Ok(Loaded {
        name: entry.name,
        graph,
        expected_volume: entry.expected_volume,
    })
}

/// A JSON array of moves such as `[{"ih": 3}, {"cap": 7}]`.
pub fn load_script(path: &Path) -> Result<Vec<Move>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        return Ok(number(a)? / number(b)?);
    }
    s.parse::<f64>()
        .map_err(|_| format!("cannot read `{s}` as a number"))
}

/// Plain numbers, multiples of π (`pi/3`, `2pi/5`, `2*pi/5`) and `acos(x)`.
pub fn real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix("acos(").and_then(|x| x.strip_suffix(')')) {
        let x = number(inner)?;
        if !(-1.0..=1.0).contains(&x) {
            return Err(format!("acos argument {x} outside [-1, 1]"));
        }
        return Ok(x.acos());
    }
    if let Some(i) = s.find("pi") {
        let coef = s[..i].trim_end_matches('*');
        let coef = if coef.is_empty() { 1.0 } else { number(coef)? };
        let rest = &s[i + 2..];
        let div = match rest.strip_prefix('/') {
            Some(d) => number(d)?,
            None if rest.is_empty() => 1.0,
            None => return Err(format!("cannot read `{s}`")),
        };
        return Ok(coef * PI / div);
    }
    number(s)
}

/// `a:<angle>` or `p:<length>`.
pub fn edge_parameter(s: &str) -> Result<EdgeParameter, String> {
    let (kind, value) = s
        .split_once(':')
        .ok_or_else(|| format!("`{s}`: expected a:<angle> or p:<length>"))?;
    let v = real(value)?;
    match kind.trim() {
        "a" => Ok(EdgeParameter::Angle(v)),
        "p" => Ok(EdgeParameter::Length(v)),
        k => Err(format!(
            "`{s}`: unknown parameter kind `{k}`, expected a or p"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(real("0.5").unwrap(), 0.5);
        assert!((real("pi/3").unwrap() - PI / 3.0).abs() < 1e-15);
        assert!((real("2pi/5").unwrap() - 0.4 * PI).abs() < 1e-15);
        assert!((real("2*pi/5").unwrap() - 0.4 * PI).abs() < 1e-15);
        assert!((real("acos(1/3)").unwrap() - (1.0f64 / 3.0).acos()).abs() < 1e-15);
        assert!(real("acos(2)").is_err());
        assert!(real("pix").is_err());
    }

    #[test]
    fn parameters() {
        assert_eq!(
            edge_parameter("p:0.25").unwrap(),
            EdgeParameter::Length(0.25)
        );
        assert!(matches!(
            edge_parameter("a:pi/2").unwrap(),
            EdgeParameter::Angle(_)
        ));
        assert!(edge_parameter("x:1").is_err());
        assert!(edge_parameter("1.0").is_err());
    }
}
