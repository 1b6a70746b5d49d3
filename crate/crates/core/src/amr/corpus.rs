//! AMR-bank style corpus files: PENMAN blocks separated by blank lines,
//! each optionally preceded by `# ::key value` metadata lines.

use std::io;
use std::path::Path;

use thiserror::Error;

use super::parse::{parse_penman, ParseError};
use super::AmrGraph;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("block {block}: {source}")]
    Parse {
        block: usize,
        #[source]
        source: ParseError,
    },
}

/// One corpus entry: captured metadata plus the parsed graph.
#[derive(Debug, Clone)]
pub struct CorpusBlock {
    pub metadata: Vec<(String, String)>,
    pub graph: AmrGraph,
}

impl CorpusBlock {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Parse corpus text into blocks, in file order. Blank lines separate
/// blocks; an empty input yields an empty list.
pub fn read_corpus_str(text: &str) -> Result<Vec<CorpusBlock>, CorpusError> {
    let mut blocks = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, blocks: &mut Vec<CorpusBlock>| -> Result<(), CorpusError> {
        if current.trim().is_empty() {
            current.clear();
            return Ok(());
        }
        let index = blocks.len();
        let graph = parse_penman(current).map_err(|source| CorpusError::Parse {
            block: index,
            source,
        })?;
        blocks.push(CorpusBlock {
            metadata: graph.metadata.clone(),
            graph,
        });
        current.clear();
        Ok(())
    };
    for line in text.lines() {
        if line.trim().is_empty() {
            flush(&mut current, &mut blocks)?;
        } else {
            current.push_str(line);
            current.push('\n');
        }
    }
    flush(&mut current, &mut blocks)?;
    Ok(blocks)
}

/// Read a corpus file from disk.
pub fn read_corpus(path: &Path) -> Result<Vec<CorpusBlock>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_corpus_str(&text)
}
