use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use super::TextError;
use crate::labels::{is_cjk, Typeface};

const DEFAULT_MAPPING: &str = include_str!("../../data/typeface_map.tsv");

/// Characters that identify a script. Built from a `simplified<TAB>traditional`
/// mapping where the traditional column may list several space-separated
/// variants. A character is script-specific only if it never appears in the
/// other column, so the two sets are disjoint.
#[derive(Debug, Clone)]
pub struct TypefaceTable {
    simplified_only: HashSet<char>,
    traditional_only: HashSet<char>,
    to_traditional: HashMap<char, char>,
    to_simplified: HashMap<char, char>,
}

impl TypefaceTable {
    pub fn shipped() -> Self {
        Self::parse(DEFAULT_MAPPING).expect("shipped typeface mapping is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TextError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, TextError> {
        let mut pairs: Vec<(char, Vec<char>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let bad = || TextError::BadMappingLine(i + 1);
            let (simp, trad) = raw.split_once('\t').ok_or_else(bad)?;
            let mut simp_chars = simp.trim().chars();
            let s = simp_chars.next().ok_or_else(bad)?;
            if simp_chars.next().is_some() {
                return Err(bad());
            }
            let mut variants = Vec::new();
            for v in trad.split_whitespace() {
                let mut cs = v.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => variants.push(c),
                    _ => return Err(bad()),
                }
            }
            if variants.is_empty() {
                return Err(bad());
            }
            pairs.push((s, variants));
        }

        let simplified_column: HashSet<char> = pairs.iter().map(|(s, _)| *s).collect();
        let traditional_column: HashSet<char> = pairs
            .iter()
            .flat_map(|(_, ts)| ts.iter().copied())
            .collect();

        let mut simplified_only = HashSet::new();
        let mut traditional_only = HashSet::new();
        let mut to_traditional = HashMap::new();
        let mut to_simplified = HashMap::new();
        for (s, ts) in &pairs {
            if ts.iter().any(|t| t != s) && !traditional_column.contains(s) {
                simplified_only.insert(*s);
            }
            for t in ts {
                if t != s && !simplified_column.contains(t) {
                    traditional_only.insert(*t);
                }
                to_simplified.entry(*t).or_insert(*s);
            }
            to_traditional.insert(*s, ts[0]);
        }
        Ok(Self {
            simplified_only,
            traditional_only,
            to_traditional,
            to_simplified,
        })
    }

    pub fn is_simplified_only(&self, c: char) -> bool {
        self.simplified_only.contains(&c)
    }

    pub fn is_traditional_only(&self, c: char) -> bool {
        self.traditional_only.contains(&c)
    }

    pub fn simplified_only(&self) -> &HashSet<char> {
        &self.simplified_only
    }

    pub fn traditional_only(&self) -> &HashSet<char> {
        &self.traditional_only
    }

    /// Maps each character to its first listed traditional form.
    pub fn to_traditional(&self, text: &str) -> String {
        text.chars()
            .map(|c| self.to_traditional.get(&c).copied().unwrap_or(c))
            .collect()
    }

    pub fn to_simplified(&self, text: &str) -> String {
        text.chars()
            .map(|c| self.to_simplified.get(&c).copied().unwrap_or(c))
            .collect()
    }

    /// Distinctive pairs (simplified-only char, traditional-only char) that
    /// map onto each other; useful for building test sentences.
    pub fn distinctive_pairs(&self) -> Vec<(char, char)> {
        let mut out: Vec<(char, char)> = self
            .to_traditional
            .iter()
            .filter(|(s, t)| self.is_simplified_only(**s) && self.is_traditional_only(**t))
            .filter(|(s, t)| self.to_simplified.get(t) == Some(s))
            .map(|(s, t)| (*s, *t))
            .collect();
        out.sort_unstable();
        out
    }
}

/// Counts script-specific characters. Ties (including none at all) resolve
/// to Simplified.
pub fn detect_typeface(text: &str, table: &TypefaceTable) -> Result<Typeface, TextError> {
    let (mut any_cjk, mut simp, mut trad) = (false, 0usize, 0usize);
    for c in text.chars() {
        if !is_cjk(c) {
            continue;
        }
        any_cjk = true;
        if table.is_simplified_only(c) {
            simp += 1;
        } else if table.is_traditional_only(c) {
            trad += 1;
        }
    }
    if !any_cjk {
        return Err(TextError::NoCjkContent);
    }
    Ok(if trad > simp {
        Typeface::Traditional
    } else {
        Typeface::Simplified
    })
}
