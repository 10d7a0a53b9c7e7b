//! Run manifests: the full command, a hash of it, and digests of every
//! input and output file. Nothing run-specific (time, host, output
//! directory) goes in, so repeating a run reproduces its manifest exactly.

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Command;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub role: String,
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub jobs: usize,
    pub inputs: Vec<FileDigest>,
    /// Paths relative to the output directory.
    pub outputs: Vec<FileDigest>,
}

pub fn config_hash(command: &Command) -> String {
    let json = serde_json::to_vec(command).expect("commands serialize");
    hex::encode(Sha256::digest(&json))
}

/// Reader that hashes everything read through it, so a corpus is digested
/// in the same pass that parses it.
pub struct HashingReader<R> {
    inner: R,
    hasher: Sha256,
    bytes: u64,
}

impl<R: Read> HashingReader<R> {
    pub fn new(inner: R) -> Self {
        HashingReader {
            inner,
            hasher: Sha256::new(),
            bytes: 0,
        }
    }

    /// Reads whatever the consumer left unread, then returns the digest.
    pub fn finish(mut self) -> io::Result<(u64, String)> {
        io::copy(&mut self.inner, &mut HashSink(&mut self.hasher, &mut self.bytes))?;
        Ok((self.bytes, hex::encode(self.hasher.finalize())))
    }
}

impl<R: Read> Read for HashingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }
}

struct HashSink<'a>(&'a mut Sha256, &'a mut u64);

impl Write for HashSink<'_> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.update(buf);
        *self.1 += buf.len() as u64;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

pub fn digest_file(path: &Path) -> io::Result<(u64, String)> {
    HashingReader::new(BufReader::new(File::open(path)?)).finish()
}

/// Collects digests while a command runs.
#[derive(Debug, Default)]
pub struct Recorder {
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl Recorder {
    pub fn input(&mut self, role: &str, path: &Path) -> io::Result<()> {
        let (bytes, sha256) = digest_file(path)?;
        self.input_digest(role, path, bytes, sha256);
        Ok(())
    }

    pub fn input_digest(&mut self, role: &str, path: &Path, bytes: u64, sha256: String) {
        self.inputs.push(FileDigest {
            role: role.to_string(),
            path: path.to_path_buf(),
            bytes,
            sha256,
        });
    }

    /// Writes `contents` to `out/relative` and records its digest.
    pub fn output(&mut self, out: &Path, relative: &str, role: &str, contents: &[u8]) -> io::Result<()> {
        let path = out.join(relative);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, contents)?;
        self.outputs.push(FileDigest {
            role: role.to_string(),
            path: PathBuf::from(relative),
            bytes: contents.len() as u64,
            sha256: hex::encode(Sha256::digest(contents)),
        });
        Ok(())
    }

    /// Records a file already written under `out`.
    pub fn existing_output(&mut self, out: &Path, relative: &str, role: &str) -> io::Result<()> {
        let (bytes, sha256) = digest_file(&out.join(relative))?;
        self.outputs.push(FileDigest {
            role: role.to_string(),
            path: PathBuf::from(relative),
            bytes,
            sha256,
        });
        Ok(())
    }

    pub fn write_manifest(self, out: &Path, command: &Command) -> io::Result<Manifest> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.clone(),
            config_hash: config_hash(command),
            seed: command.seed(),
            jobs: command.jobs(),
            inputs: self.inputs,
            outputs: self.outputs,
        };
        let mut json = serde_json::to_vec_pretty(&manifest).expect("manifests serialize");
        json.push(b'\n');
        std::fs::write(out.join(MANIFEST_FILE), json)?;
        Ok(manifest)
    }
}

pub fn load(path: &Path) -> anyhow::Result<Manifest> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
