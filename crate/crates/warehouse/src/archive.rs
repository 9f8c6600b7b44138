//! Zip bundles of module files.

use std::fs;
use std::io::{Cursor, Read, Write};
use std::path::{Path, PathBuf};

use warehouse_core::diagnostic::{has_errors, Code, Diagnostic};
use warehouse_core::{parse_module, serialize_module, Bundle, BundleEntry, LearningModule};
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, ZipArchive, ZipWriter};

/// A bundle that loaded cleanly, plus any warnings raised on the way.
#[derive(Debug, Clone)]
pub struct LoadedBundle {
    pub bundle: Bundle,
    pub warnings: Vec<Diagnostic>,
}

fn is_json(name: &str) -> bool {
    name.to_ascii_lowercase().ends_with(".json")
}

/// Reads every `*.json` member of a zip archive. Fails closed: one bad
/// member fails the bundle, and the error lists every diagnostic from every
/// member.
pub fn load_bundle(bytes: &[u8]) -> Result<LoadedBundle, Vec<Diagnostic>> {
    let mut zip = ZipArchive::new(Cursor::new(bytes))
        .map_err(|e| vec![Diagnostic::new(Code::ZipCorrupt, "$", format!("not a readable zip archive: {e}"))])?;
    let mut diags = Vec::new();
    let mut entries = Vec::new();
    for i in 0..zip.len() {
        let mut file = match zip.by_index(i) {
            Ok(f) => f,
            Err(e) => {
                diags.push(Diagnostic::new(Code::ZipCorrupt, format!("entry {i}"), e.to_string()));
                continue;
            }
        };
        if file.is_dir() {
            continue;
        }
        let name = file.name().to_string();
        if !is_json(&name) || name.starts_with("__MACOSX/") {
            diags.push(
                Diagnostic::new(Code::NonJsonEntry, "$", "not a module file; ignored").in_file(&name),
            );
            continue;
        }
        let mut buf = Vec::new();
        if let Err(e) = file.read_to_end(&mut buf) {
            diags.push(Diagnostic::new(Code::ZipCorrupt, "$", e.to_string()).in_file(&name));
            continue;
        }
        match parse_module(&buf) {
            Ok(module) => {
                diags.extend(warehouse_core::validate_module(&module).into_iter().map(|d| d.in_file(&name)));
                entries.push(BundleEntry { filename: name, module });
            }
            Err(ds) => diags.extend(ds.into_iter().map(|d| d.in_file(&name))),
        }
    }
    if has_errors(&diags) {
        return Err(diags);
    }
    match Bundle::new(entries) {
        Ok(bundle) => Ok(LoadedBundle { bundle, warnings: diags }),
        Err(_) => {
            diags.push(Diagnostic::new(Code::BundleEmpty, "$", "archive holds no module files"));
            Err(diags)
        }
    }
}

fn options() -> SimpleFileOptions {
    // Fixed timestamps keep archives byte-reproducible.
    SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .last_modified_time(zip::DateTime::default())
}

/// Writes raw members into a zip in the given order.
pub fn write_zip<'a>(files: impl IntoIterator<Item = (&'a str, &'a [u8])>) -> std::io::Result<Vec<u8>> {
    let mut zip = ZipWriter::new(Cursor::new(Vec::new()));
    for (name, bytes) in files {
        zip.start_file(name, options())?;
        zip.write_all(bytes)?;
    }
    Ok(zip.finish()?.into_inner())
}

/// Serializes modules canonically and zips them.
pub fn bundle_zip(modules: &[(String, LearningModule)]) -> Vec<u8> {
    let texts: Vec<(String, String)> =
        modules.iter().map(|(n, m)| (n.clone(), serialize_module(m))).collect();
    write_zip(texts.iter().map(|(n, t)| (n.as_str(), t.as_bytes())))
        .expect("writing to memory cannot fail")
}

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bundle has invalid members")]
    Invalid(Vec<Diagnostic>),
    #[error("zip member {0:?} would be written outside the target directory")]
    UnsafePath(String),
    #[error(transparent)]
    Zip(#[from] zip::result::ZipError),
}

impl ArchiveError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        ArchiveError::Io { path: path.to_path_buf(), source }
    }
}

/// Zips the `*.json` files directly inside `dir`, validating every one first.
/// Returns the archive and any warnings; nothing is produced on errors.
pub fn pack_dir(dir: &Path) -> Result<(Vec<u8>, Vec<Diagnostic>), ArchiveError> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| ArchiveError::io(dir, e))? {
        let entry = entry.map_err(|e| ArchiveError::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if entry.path().is_file() && is_json(&name) {
            names.push(name);
        }
    }
    names.sort();
    let mut files = Vec::new();
    let mut diags = Vec::new();
    for name in names {
        let path = dir.join(&name);
        let bytes = fs::read(&path).map_err(|e| ArchiveError::io(&path, e))?;
        match parse_module(&bytes) {
            Ok(m) => diags.extend(warehouse_core::validate_module(&m).into_iter().map(|d| d.in_file(&name))),
            Err(ds) => diags.extend(ds.into_iter().map(|d| d.in_file(&name))),
        }
        files.push((name, bytes));
    }
    if files.is_empty() {
        diags.push(Diagnostic::new(Code::BundleEmpty, "$", "directory holds no module files").in_file(dir.display().to_string()));
    }
    if has_errors(&diags) {
        return Err(ArchiveError::Invalid(diags));
    }
    let zip = write_zip(files.iter().map(|(n, b)| (n.as_str(), b.as_slice())))
        .map_err(|e| ArchiveError::io(dir, e))?;
    Ok((zip, diags))
}

/// Extracts every file member under `dir`, keeping member names.
pub fn unpack(bytes: &[u8], dir: &Path) -> Result<Vec<PathBuf>, ArchiveError> {
    let mut zip = ZipArchive::new(Cursor::new(bytes))?;
    let mut written = Vec::new();
    for i in 0..zip.len() {
        let mut file = zip.by_index(i)?;
        if file.is_dir() {
            continue;
        }
        let rel = file.enclosed_name().ok_or_else(|| ArchiveError::UnsafePath(file.name().to_string()))?;
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| ArchiveError::io(parent, e))?;
        }
        let mut buf = Vec::new();
        file.read_to_end(&mut buf).map_err(|e| ArchiveError::io(&path, e))?;
        fs::write(&path, buf).map_err(|e| ArchiveError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
