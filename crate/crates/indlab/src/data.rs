//! Bundled ray sets and models. A name resolves to a file on disk if one
//! exists, then to `$INDLAB_DATA_DIR/<name>`, then to the copy compiled into
//! the binary.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const DATA_DIR_VAR: &str = "INDLAB_DATA_DIR";

pub const BUNDLED: &[(&str, &str)] = &[
    ("peres33.rays", include_str!("../data/peres33.rays")),
    ("demo.rays", include_str!("../data/demo.rays")),
    ("bohm_coin.json", include_str!("../data/bohm_coin.json")),
    ("thooft_parity.json", include_str!("../data/thooft_parity.json")),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    File(PathBuf),
    Bundled(&'static str),
}

impl Origin {
    pub fn path(&self) -> Option<&Path> {
        match self {
            Origin::File(p) => Some(p),
            Origin::Bundled(_) => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Origin::File(p) => p.display().to_string(),
            Origin::Bundled(n) => format!("bundled:{n}"),
        }
    }
}

fn bundled(name: &str) -> Option<(&'static str, &'static str)> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name || n.split('.').next() == Some(name))
        .copied()
}

pub fn resolve(name: &str) -> Result<(String, Origin)> {
    let direct = Path::new(name);
    if direct.is_file() {
        let text = std::fs::read_to_string(direct).map_err(|e| Error::io(direct, e))?;
        return Ok((text, Origin::File(direct.to_path_buf())));
    }
    if let Some(dir) = std::env::var_os(DATA_DIR_VAR) {
        let file_name = bundled(name).map_or(name, |(n, _)| n);
        let p = Path::new(&dir).join(file_name);
        if p.is_file() {
            let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            return Ok((text, Origin::File(p)));
        }
    }
    match bundled(name) {
        Some((n, text)) => Ok((text.to_string(), Origin::Bundled(n))),
        None => Err(Error::io(
            direct,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled data set"),
        )),
    }
}
