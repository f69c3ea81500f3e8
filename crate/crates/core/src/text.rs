//! Node text and the keyword -> node inverted index.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use crate::error::{RaksError, Result};
use crate::graph::{KnowledgeGraph, NodeId};

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeTextIndex {
    /// Text per node; empty when a node has none.
    pub(crate) node_text: Vec<String>,
    /// Token -> sorted, duplicate-free node ids.
    pub(crate) postings: HashMap<String, Vec<NodeId>>,
}

/// Nodes denoted by one query keyword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordMatch {
    pub keyword: String,
    pub nodes: Vec<NodeId>,
}

impl KeywordMatch {
    pub fn new(keyword: impl Into<String>, nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let nodes: BTreeSet<NodeId> = nodes.into_iter().collect();
        Self { keyword: keyword.into(), nodes: nodes.into_iter().collect() }
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }
}

/// Reads `node_id<TAB>text` lines, resolving external ids against `graph`.
pub fn parse_node_texts<R: BufRead>(
    reader: R,
    graph: &KnowledgeGraph,
) -> Result<Vec<(NodeId, String)>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((id, text)) = line.split_once('\t') else {
            return Err(RaksError::Parse {
                line: idx + 1,
                message: "expected `node_id<TAB>text`".into(),
            });
        };
        let node = graph.node_id(id).ok_or_else(|| RaksError::UnknownNode(id.to_owned()))?;
        out.push((node, text.to_owned()));
    }
    Ok(out)
}

impl NodeTextIndex {
    /// Builds the index for a graph with `node_count` nodes. Repeated entries
    /// for one node are concatenated.
    pub fn build(node_count: usize, node_texts: &[(NodeId, String)]) -> Result<Self> {
        let mut node_text = vec![String::new(); node_count];
        for (node, text) in node_texts {
            let slot = node_text
                .get_mut(*node as usize)
                .ok_or_else(|| RaksError::UnknownNode(node.to_string()))?;
            if !slot.is_empty() {
                slot.push(' ');
            }
            slot.push_str(text);
        }
        let mut postings: HashMap<String, Vec<NodeId>> = HashMap::new();
        for (v, text) in node_text.iter().enumerate() {
            for token in tokenize(text) {
                let list = postings.entry(token).or_default();
                if list.last() != Some(&(v as NodeId)) {
                    list.push(v as NodeId);
                }
            }
        }
        Ok(Self { node_text, postings })
    }

    pub fn node_count(&self) -> usize {
        self.node_text.len()
    }

    pub fn text(&self, v: NodeId) -> &str {
        self.node_text.get(v as usize).map(String::as_str).unwrap_or("")
    }

    pub fn posting(&self, token: &str) -> &[NodeId] {
        self.postings.get(token).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn token_count(&self) -> usize {
        self.postings.len()
    }

    /// Nodes whose text contains every token of `keyword`.
    pub fn lookup(&self, keyword: &str) -> Result<KeywordMatch> {
        let tokens = tokenize(keyword);
        if tokens.is_empty() {
            return Err(RaksError::InvalidKeyword(keyword.to_owned()));
        }
        let mut lists: Vec<&[NodeId]> = tokens.iter().map(|t| self.posting(t)).collect();
        lists.sort_by_key(|l| l.len());
        let mut acc: Vec<NodeId> = lists[0].to_vec();
        for list in &lists[1..] {
            acc.retain(|v| list.binary_search(v).is_ok());
        }
        if acc.is_empty() {
            return Err(RaksError::KeywordUnresolved(keyword.to_owned()));
        }
        Ok(KeywordMatch { keyword: keyword.to_owned(), nodes: acc })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(entries: &[(NodeId, &str)]) -> NodeTextIndex {
        let n = entries.iter().map(|e| e.0 as usize + 1).max().unwrap_or(0);
        let owned: Vec<_> = entries.iter().map(|(v, t)| (*v, t.to_string())).collect();
        NodeTextIndex::build(n, &owned).unwrap()
    }

    #[test]
    fn tokenizes_name() {
        let i = idx(&[(0, "Lee Kuan Yew")]);
        for t in ["lee", "kuan", "yew"] {
            assert_eq!(i.posting(t), &[0]);
        }
        assert_eq!(i.token_count(), 3);
    }

    #[test]
    fn case_folds() {
        let i = idx(&[(0, "USA"), (1, "usa trade")]);
        assert_eq!(i.posting("usa"), &[0, 1]);
    }

    #[test]
    fn splits_punctuation() {
        let i = idx(&[(0, "Asia-Pacific")]);
        assert_eq!(i.posting("asia"), &[0]);
        assert_eq!(i.posting("pacific"), &[0]);
        assert_eq!(i.token_count(), 2);
    }

    #[test]
    fn lookup_is_conjunctive() {
        let i = idx(&[(0, "USA"), (1, "usa trade")]);
        assert_eq!(i.lookup("usa").unwrap().nodes, vec![0, 1]);
        assert_eq!(i.lookup("USA Trade").unwrap().nodes, vec![1]);
        match i.lookup("quantum") {
            Err(RaksError::KeywordUnresolved(k)) => assert_eq!(k, "quantum"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(i.lookup("--"), Err(RaksError::InvalidKeyword(_))));
    }

    #[test]
    fn unknown_node_rejected() {
        let err = NodeTextIndex::build(1, &[(3, "x".into())]).unwrap_err();
        assert!(matches!(err, RaksError::UnknownNode(_)));
    }

    #[test]
    fn repeated_token_posted_once() {
        let i = idx(&[(0, "new new york")]);
        assert_eq!(i.posting("new"), &[0]);
    }
}
