use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{compose, validate_profile, ComposedKb, GovernanceError, ProfileReport};
use crate::compiler::{compile_text, KnowledgeBlock};
use crate::corpus::{BLOCK_SOURCES, PROFILE_SOURCES};
use crate::rdf::{parse_turtle, Graph};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub name: String,
    /// Block names in manifest order, without repeats.
    pub blocks: Vec<String>,
}

/// Parses a `profile: <name>` manifest followed by one block name per line.
pub fn parse_profile(file: &str, text: &str) -> Result<Profile, GovernanceError> {
    let bad = |reason: &str| GovernanceError::Manifest {
        file: file.to_string(),
        reason: reason.to_string(),
    };
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let name = lines
        .next()
        .and_then(|l| l.strip_prefix("profile:"))
        .map(str::trim)
        .filter(|n| !n.is_empty())
        .ok_or_else(|| bad("first line must be 'profile: <name>'"))?;
    let mut blocks: Vec<String> = Vec::new();
    for line in lines {
        if line.contains(char::is_whitespace) || line.contains(':') {
            return Err(bad(&format!("invalid block name '{line}'")));
        }
        if !blocks.iter().any(|b| b == line) {
            blocks.push(line.to_string());
        }
    }
    if blocks.is_empty() {
        return Err(bad("profile lists no blocks"));
    }
    Ok(Profile {
        name: name.to_string(),
        blocks,
    })
}

/// Block name for a file: `logging.ir.yaml` and `logging.ttl` both give `logging`.
fn block_name(file: &str) -> Option<&str> {
    let base = file.rsplit('/').next().unwrap_or(file);
    base.strip_suffix(".ir.yaml").or_else(|| base.strip_suffix(".ttl"))
}

fn load_block(file: &str, text: &str) -> Result<KnowledgeBlock, GovernanceError> {
    let name = block_name(file).unwrap_or(file);
    let block_err = |source| GovernanceError::Block {
        file: file.to_string(),
        source,
    };
    if file.ends_with(".ttl") {
        let g = parse_turtle(text).map_err(|e| GovernanceError::Manifest {
            file: file.to_string(),
            reason: e.to_string(),
        })?;
        KnowledgeBlock::from_shape_graph(name, &g).map_err(block_err)
    } else {
        compile_text(text, name).map_err(block_err)
    }
}

/// Read-only catalogue of blocks and profiles.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    blocks: BTreeMap<String, KnowledgeBlock>,
    profiles: BTreeMap<String, Profile>,
}

impl Registry {
    pub fn from_sources<'a>(
        blocks: impl IntoIterator<Item = (&'a str, &'a str)>,
        profiles: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, GovernanceError> {
        let mut reg = Registry::default();
        for (file, text) in blocks {
            let block = load_block(file, text)?;
            reg.blocks.insert(block.name.clone(), block);
        }
        for (file, text) in profiles {
            let p = parse_profile(file, text)?;
            reg.profiles.insert(p.name.clone(), p);
        }
        Ok(reg)
    }

    /// The shipped corpus.
    pub fn bundled() -> Self {
        Self::from_sources(BLOCK_SOURCES.iter().copied(), PROFILE_SOURCES.iter().copied())
            .expect("bundled registry is valid")
    }

    /// Reads `*.ir.yaml` / `*.ttl` blocks and `*.profile` manifests.
    pub fn from_dirs(block_dir: &Path, profile_dir: &Path) -> Result<Self, GovernanceError> {
        let read_dir = |dir: &Path, keep: &dyn Fn(&str) -> bool| -> Result<Vec<(String, String)>, GovernanceError> {
            let io = |e: std::io::Error| GovernanceError::Io {
                path: dir.display().to_string(),
                reason: e.to_string(),
            };
            let mut files = Vec::new();
            for entry in fs::read_dir(dir).map_err(io)? {
                let path = entry.map_err(io)?.path();
                let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("").to_string();
                if keep(&name) {
                    files.push((name, fs::read_to_string(&path).map_err(io)?));
                }
            }
            files.sort();
            Ok(files)
        };
        let blocks = read_dir(block_dir, &|n| block_name(n).is_some())?;
        let profiles = read_dir(profile_dir, &|n| n.ends_with(".profile"))?;
        Self::from_sources(
            blocks.iter().map(|(a, b)| (a.as_str(), b.as_str())),
            profiles.iter().map(|(a, b)| (a.as_str(), b.as_str())),
        )
    }

    pub fn block(&self, name: &str) -> Option<&KnowledgeBlock> {
        self.blocks.get(name)
    }

    pub fn blocks(&self) -> impl Iterator<Item = &KnowledgeBlock> {
        self.blocks.values()
    }

    pub fn profile(&self, name: &str) -> Result<&Profile, GovernanceError> {
        self.profiles
            .get(name)
            .ok_or_else(|| GovernanceError::UnknownProfile(name.to_string()))
    }

    pub fn profile_names(&self) -> impl Iterator<Item = &str> {
        self.profiles.keys().map(String::as_str)
    }

    /// KB for a profile: ⊕ over its blocks.
    pub fn compose_profile(&self, name: &str) -> Result<ComposedKb, GovernanceError> {
        let profile = self.profile(name)?;
        let blocks = profile
            .blocks
            .iter()
            .map(|b| {
                self.blocks.get(b).ok_or_else(|| GovernanceError::UnknownBlock {
                    profile: name.to_string(),
                    block: b.clone(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        compose(blocks)
    }

    pub fn validate(&self, evidence: &Graph, profile: &str, case: Option<&str>) -> Result<ProfileReport, GovernanceError> {
        let kb = self.compose_profile(profile)?;
        Ok(ProfileReport {
            profile: profile.to_string(),
            case: case.map(str::to_string),
            report: validate_profile(evidence, &kb),
        })
    }
}
