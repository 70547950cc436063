use serde::{Deserialize, Serialize};

use crate::text::{Lexicon, TextError, TokenizedDoc};

/// Hashed bag-of-words block size.
pub const HASH_BUCKETS: u32 = 1 << 20;
/// Index of the lexicon positive-count feature.
pub const LEXICON_POSITIVE: u32 = HASH_BUCKETS;
/// Index of the lexicon negative-count feature.
pub const LEXICON_NEGATIVE: u32 = HASH_BUCKETS + 1;
/// Total feature-space size.
pub const FEATURE_DIM: usize = HASH_BUCKETS as usize + 2;

pub const DEFAULT_HASH_SALT: u64 = 0x5EED_7A61_C0DE_2019;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over the salt's little-endian bytes followed by the token bytes.
pub fn stable_hash(salt: u64, token: &str) -> u64 {
    salt.to_le_bytes()
        .iter()
        .chain(token.as_bytes())
        .fold(FNV_OFFSET, |h, &b| {
            (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
        })
}

pub fn bucket(salt: u64, token: &str) -> u32 {
    (stable_hash(salt, token) % u64::from(HASH_BUCKETS)) as u32
}

/// Sparse L2-normalized hashed token counts plus two raw lexicon counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Sorted by index, no duplicates, every index < `HASH_BUCKETS`.
    hashed: Vec<(u32, f64)>,
    lexicon: [f64; 2],
}

impl FeatureVector {
    pub fn from_parts(mut hashed: Vec<(u32, f64)>, lexicon: [f64; 2]) -> Self {
        hashed.sort_unstable_by_key(|p| p.0);
        hashed.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        debug_assert!(hashed.iter().all(|p| p.0 < HASH_BUCKETS));
        Self { hashed, lexicon }
    }

    pub fn zero() -> Self {
        Self {
            hashed: Vec::new(),
            lexicon: [0.0; 2],
        }
    }

    pub fn hashed(&self) -> &[(u32, f64)] {
        &self.hashed
    }

    pub fn lexicon_counts(&self) -> [f64; 2] {
        self.lexicon
    }

    pub fn with_lexicon_counts(&self, lexicon: [f64; 2]) -> Self {
        Self {
            hashed: self.hashed.clone(),
            lexicon,
        }
    }

    /// All non-zero entries in index order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.hashed.iter().copied().chain(
            [
                (LEXICON_POSITIVE, self.lexicon[0]),
                (LEXICON_NEGATIVE, self.lexicon[1]),
            ]
            .into_iter()
            .filter(|p| p.1 != 0.0),
        )
    }

    pub fn norm_sq(&self) -> f64 {
        self.iter().map(|(_, v)| v * v).sum()
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| dense[i as usize] * v).sum()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            hashed: self.hashed.iter().map(|&(i, v)| (i, v * k)).collect(),
            lexicon: [self.lexicon[0] * k, self.lexicon[1] * k],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|(_, v)| v.is_finite())
    }
}

/// Hashes token counts into buckets and L2-normalizes the block.
pub fn hashed_block(tokens: &[String], salt: u64) -> Vec<(u32, f64)> {
    let mut idx: Vec<u32> = tokens.iter().map(|t| bucket(salt, t)).collect();
    idx.sort_unstable();
    let mut counts: Vec<(u32, f64)> = Vec::new();
    for i in idx {
        match counts.last_mut() {
            Some(last) if last.0 == i => last.1 += 1.0,
            _ => counts.push((i, 1.0)),
        }
    }
    let norm = counts.iter().map(|p| p.1 * p.1).sum::<f64>().sqrt();
    if norm > 0.0 {
        for p in &mut counts {
            p.1 /= norm;
        }
    }
    counts
}

pub fn featurize_with_salt(
    doc: &TokenizedDoc,
    lex: &Lexicon,
    salt: u64,
) -> Result<FeatureVector, TextError> {
    let (pos, neg) = lex.counts(doc)?;
    Ok(FeatureVector {
        hashed: hashed_block(&doc.tokens, salt),
        lexicon: [f64::from(pos), f64::from(neg)],
    })
}

pub fn featurize(doc: &TokenizedDoc, lex: &Lexicon) -> Result<FeatureVector, TextError> {
    featurize_with_salt(doc, lex, DEFAULT_HASH_SALT)
}
