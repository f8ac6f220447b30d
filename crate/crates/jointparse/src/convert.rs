//! Building joint trees from an RST discourse tree and the constituency
//! trees of the same document.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use jointparse_core::rst::convert_rst;
use jointparse_core::splice::{align_edus, splice_edus, SpliceError, SyntaxForest};
use jointparse_core::tree::TreeError;
use jointparse_core::JointTree;
use rayon::prelude::*;

use crate::formats::dis::read_rst;
use crate::formats::ptb::read_ptb;
use crate::formats::FormatError;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ConvertError {
    #[error("discourse tree: {0}")]
    Rst(FormatError),
    #[error("constituency trees: {0}")]
    Ptb(FormatError),
    #[error("no constituency file")]
    NoPtb,
    #[error(transparent)]
    Splice(#[from] SpliceError),
    #[error("converted tree is not a joint tree: {0}")]
    Invalid(#[from] TreeError),
}

/// Converts one document.
pub fn convert_document(dis: &str, ptb: &str) -> Result<JointTree, ConvertError> {
    let rst = read_rst(dis).map_err(ConvertError::Rst)?;
    let skeleton = convert_rst(&rst);
    let sentences = read_ptb(ptb).map_err(ConvertError::Ptb)?;
    let forest = SyntaxForest::from_sentences(sentences)?;
    let edus = align_edus(&rst.edu_texts(), forest.tokens())?;
    let tree = splice_edus(&skeleton, &edus, &forest)?;
    tree.validate()?;
    Ok(tree)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dropped {
    pub document: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct Conversion {
    /// `(document id, tree)` in document-id order.
    pub trees: Vec<(String, JointTree)>,
    pub dropped: Vec<Dropped>,
}

/// `wsj_0600.out.dis` and `wsj_0600.mrg` both name document `wsj_0600`.
pub fn document_id(path: &Path) -> Option<String> {
    let name = path.file_name()?.to_str()?;
    Some(name.split('.').next().unwrap_or(name).to_string())
}

fn walk(dir: &Path, keep: &dyn Fn(&Path) -> bool, out: &mut Vec<PathBuf>) -> io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            walk(&path, keep, out)?;
        } else if keep(&path) {
            out.push(path);
        }
    }
    Ok(())
}

fn has_extension(path: &Path, exts: &[&str]) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| exts.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct ReadError {
    pub path: PathBuf,
    pub source: io::Error,
}

fn read(path: &Path) -> Result<String, ReadError> {
    fs::read_to_string(path).map_err(|source| ReadError {
        path: path.to_path_buf(),
        source,
    })
}

/// Converts every `.dis` file under `rst_dir` whose document has a `.mrg`
/// (or `.ptb`) file under `ptb_dir`. Documents that fail to convert are
/// dropped with the reason; unreadable files are errors, all of them
/// reported together.
pub fn convert_dirs(ptb_dir: &Path, rst_dir: &Path) -> Result<Conversion, Vec<ReadError>> {
    let listing = |dir: &Path, exts: &'static [&'static str]| {
        let mut files = Vec::new();
        walk(dir, &|p| has_extension(p, exts), &mut files)
            .map_err(|source| vec![ReadError { path: dir.to_path_buf(), source }])?;
        Ok::<_, Vec<ReadError>>(files)
    };
    let mut ptb_files: BTreeMap<String, PathBuf> = BTreeMap::new();
    for p in listing(ptb_dir, &["mrg", "ptb"])? {
        if let Some(id) = document_id(&p) {
            ptb_files.entry(id).or_insert(p);
        }
    }
    let mut rst_files: Vec<(String, PathBuf)> = listing(rst_dir, &["dis"])?
        .into_iter()
        .filter_map(|p| Some((document_id(&p)?, p)))
        .collect();
    rst_files.sort();

    type Outcome = Result<Result<JointTree, ConvertError>, ReadError>;
    let results: Vec<(String, Outcome)> = rst_files
        .par_iter()
        .map(|(id, path)| {
            let outcome = (|| {
                let dis = read(path)?;
                let Some(ptb_path) = ptb_files.get(id) else {
                    return Ok(Err(ConvertError::NoPtb));
                };
                let ptb = read(ptb_path)?;
                Ok(convert_document(&dis, &ptb))
            })();
            (id.clone(), outcome)
        })
        .collect();

    let mut conversion = Conversion::default();
    let mut failures = Vec::new();
    for (id, outcome) in results {
        match outcome {
            Ok(Ok(tree)) => conversion.trees.push((id, tree)),
            Ok(Err(e)) => conversion.dropped.push(Dropped {
                document: id,
                reason: e.to_string(),
            }),
            Err(e) => failures.push(e),
        }
    }
    if failures.is_empty() {
        Ok(conversion)
    } else {
        Err(failures)
    }
}

/// `document<TAB>reason` lines.
pub fn write_dropped(dropped: &[Dropped]) -> String {
    dropped
        .iter()
        .map(|d| format!("{}\t{}\n", d.document, d.reason))
        .collect()
}
