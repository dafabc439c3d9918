//! Graph bundles on disk, run manifests and archive export.
//!
//! A bundle is a directory holding `vertices.tsv`, `edges.tsv` and
//! `params.json`; commands add a `manifest.json` describing the run.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::generator::{read_edges_tsv, write_edges_tsv, Graph};
use crate::model::{read_vertices_tsv, write_vertices_tsv, GirgParams};

pub const VERTICES_FILE: &str = "vertices.tsv";
pub const EDGES_FILE: &str = "edges.tsv";
pub const PARAMS_FILE: &str = "params.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Data files of a bundle, in archive order.
pub const DATA_FILES: [&str; 3] = [EDGES_FILE, PARAMS_FILE, VERTICES_FILE];

/// Writes the three data files of `graph` into `dir`, creating it.
pub fn write_bundle(dir: &Path, graph: &Graph) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| with_path(e, dir))?;
    let vertices = dir.join(VERTICES_FILE);
    let mut out = BufWriter::new(File::create(&vertices)?);
    write_vertices_tsv(&mut out, graph.vertices(), graph.params().d)?;
    out.flush()?;

    let edges = dir.join(EDGES_FILE);
    let mut out = BufWriter::new(File::create(&edges)?);
    write_edges_tsv(&mut out, graph.edges())?;
    out.flush()?;

    let params = dir.join(PARAMS_FILE);
    write_json(&params, graph.params())?;
    Ok(vec![vertices, edges, params])
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| with_path(e, path))
}

fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Reads a bundle written by [`write_bundle`], re-validating the edges.
pub fn read_bundle(dir: &Path) -> Result<Graph> {
    let params: GirgParams = read_json(&dir.join(PARAMS_FILE))?;
    params.validate()?;
    let vertices = read_vertices_tsv(BufReader::new(open(&dir.join(VERTICES_FILE))?), params.d)?;
    let edges = read_edges_tsv(BufReader::new(open(&dir.join(EDGES_FILE))?))?;
    Graph::from_edges(params, vertices, edges)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| with_path(e, path))?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed {
        file: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// Lower-case hex SHA-256 of a file.
pub fn file_digest(path: &Path) -> Result<String> {
    let mut file = open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let read = file.read(&mut buf)?;
        if read == 0 {
            break;
        }
        hasher.update(&buf[..read]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// What a command read and wrote, with enough detail to repeat it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: String,
    pub tool_version: String,
    pub params: Option<GirgParams>,
    pub seed: Option<u64>,
    /// File name to SHA-256.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub threads: usize,
    pub elapsed_ms: u64,
}

impl RunManifest {
    pub fn new(command_line: String, params: Option<GirgParams>, threads: usize) -> Self {
        RunManifest {
            command_line,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: params.as_ref().map(|p| p.seed),
            params,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            threads,
            elapsed_ms: 0,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.insert(display_name(path), file_digest(path)?);
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) -> Result<()> {
        self.outputs.insert(display_name(path), file_digest(path)?);
        Ok(())
    }

    /// Checks every recorded output digest against the file next to the
    /// manifest in `dir`.
    pub fn verify_outputs(&self, dir: &Path) -> Result<bool> {
        for (name, digest) in &self.outputs {
            if &file_digest(&dir.join(name))? != digest {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn display_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Packs the data files of the bundle in `dir` into a zip archive with
/// fixed timestamps and permissions, so equal bundles give equal bytes.
pub fn export_bundle(dir: &Path, archive: &Path) -> Result<()> {
    // parse first so a damaged bundle is not silently archived
    read_bundle(dir)?;
    if let Some(parent) = archive.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut zip = zip::ZipWriter::new(BufWriter::new(File::create(archive)?));
    let options = zip::write::SimpleFileOptions::default()
        .compression_method(zip::CompressionMethod::Deflated)
        .last_modified_time(zip::DateTime::default())
        .unix_permissions(0o644);
    for name in DATA_FILES {
        zip.start_file(name, options).map_err(zip_error)?;
        zip.write_all(&fs::read(dir.join(name))?)?;
    }
    zip.finish().map_err(zip_error)?.flush()?;
    Ok(())
}

fn zip_error(e: zip::result::ZipError) -> Error {
    match e {
        zip::result::ZipError::Io(io) => Error::Io(io),
        other => Error::InvalidInput(other.to_string()),
    }
}
