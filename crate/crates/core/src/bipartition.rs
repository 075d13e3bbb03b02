//! Splits of a multipartite party set into two groups.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, LazyLock, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A split `alpha | complement` of the parties `0..N`.
///
/// `alpha` is always presented as the "A" side of a decomposition. The
/// canonical form of an unordered split is the one whose `alpha` contains
/// party 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    alpha: Vec<usize>,
    complement: Vec<usize>,
    dims: Vec<usize>,
}

impl Bipartition {
    pub fn new(alpha: &[usize], dims: &[usize]) -> Result<Self> {
        let n = dims.len();
        if n < 2 {
            return Err(Error::InvalidParties(format!(
                "a bipartition needs at least two parties, got {n}"
            )));
        }
        let mut alpha = alpha.to_vec();
        alpha.sort_unstable();
        alpha.dedup();
        if alpha.is_empty() || alpha.len() >= n {
            return Err(Error::InvalidParties(format!(
                "alpha must be a nonempty strict subset of 0..{n}, got {alpha:?}"
            )));
        }
        if let Some(&p) = alpha.iter().find(|&&p| p >= n) {
            return Err(Error::InvalidParties(format!("party {p} out of range 0..{n}")));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidParties("local dimensions must be positive".into()));
        }
        let complement = (0..n).filter(|p| !alpha.contains(p)).collect();
        Ok(Self {
            alpha,
            complement,
            dims: dims.to_vec(),
        })
    }

    /// Parses labels like `0|12`, `A|BC` or `0,1|2,3`.
    pub fn parse(label: &str, dims: &[usize]) -> Result<Self> {
        let (left, right) = label
            .split_once('|')
            .ok_or_else(|| Error::InvalidParties(format!("missing '|' in {label:?}")))?;
        let parse_party = |tok: &str| -> Result<usize> {
            let tok = tok.trim();
            if let Ok(v) = tok.parse::<usize>() {
                return Ok(v);
            }
            let mut chars = tok.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_uppercase() => Ok(c as usize - 'A' as usize),
                _ => Err(Error::InvalidParties(format!("bad party token {tok:?}"))),
            }
        };
        let side = |s: &str| -> Result<Vec<usize>> {
            if s.contains(',') {
                s.split(',').map(parse_party).collect()
            } else {
                s.trim().chars().map(|c| parse_party(&c.to_string())).collect()
            }
        };
        let alpha = side(left)?;
        let mut all = [alpha.clone(), side(right)?].concat();
        all.sort_unstable();
        if all != (0..dims.len()).collect::<Vec<_>>() {
            return Err(Error::InvalidParties(format!(
                "{label:?} does not split parties 0..{}",
                dims.len()
            )));
        }
        Self::new(&alpha, dims)
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    /// Dimension of the alpha side.
    pub fn m_alpha(&self) -> usize {
        self.alpha.iter().map(|&p| self.dims[p]).product()
    }

    /// Dimension of the complement side.
    pub fn n_alpha_bar(&self) -> usize {
        self.complement.iter().map(|&p| self.dims[p]).product()
    }

    pub fn alpha_dims(&self) -> Vec<usize> {
        self.alpha.iter().map(|&p| self.dims[p]).collect()
    }

    pub fn complement_dims(&self) -> Vec<usize> {
        self.complement.iter().map(|&p| self.dims[p]).collect()
    }

    /// The smaller of the two side dimensions.
    pub fn min_side_dim(&self) -> usize {
        self.m_alpha().min(self.n_alpha_bar())
    }

    pub fn is_canonical(&self) -> bool {
        self.alpha.contains(&0)
    }

    /// Same split with party 0 on the alpha side.
    pub fn canonical(&self) -> Self {
        if self.is_canonical() {
            self.clone()
        } else {
            self.swapped()
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            alpha: self.complement.clone(),
            complement: self.alpha.clone(),
            dims: self.dims.clone(),
        }
    }

    /// Party order placing alpha first, then the complement.
    pub fn party_order(&self) -> Vec<usize> {
        self.alpha.iter().chain(self.complement.iter()).copied().collect()
    }

    /// Basis-index permutation `perm[new] = old` reordering the parties so
    /// alpha precedes the complement. Cached per `(dims, alpha)`.
    pub(crate) fn index_permutation(&self) -> Arc<Vec<usize>> {
        static CACHE: LazyLock<Mutex<HashMap<(Vec<usize>, Vec<usize>), Arc<Vec<usize>>>>> =
            LazyLock::new(|| Mutex::new(HashMap::new()));
        let key = (self.dims.clone(), self.alpha.clone());
        let mut cache = CACHE.lock().expect("permutation cache poisoned");
        cache
            .entry(key)
            .or_insert_with(|| Arc::new(party_permutation(&self.dims, &self.party_order())))
            .clone()
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.dims.len() > 10;
        let join = |parties: &[usize]| {
            let parts: Vec<String> = parties.iter().map(|p| p.to_string()).collect();
            parts.join(if wide { "," } else { "" })
        };
        write!(f, "{}|{}", join(&self.alpha), join(&self.complement))
    }
}

impl FromStr for Bipartition {
    type Err = Error;

    /// Parses a label without dimension information; every party is taken
    /// to be a qubit and the party count is inferred from the label.
    fn from_str(s: &str) -> Result<Self> {
        let count = s.chars().filter(|c| c.is_ascii_alphanumeric()).count();
        Self::parse(s, &vec![2; count])
    }
}

/// All `2^(n-1) - 1` canonical bipartitions, ordered by alpha size and then
/// lexicographically.
pub fn enumerate_bipartitions(n_parties: usize, dims: &[usize]) -> Result<Vec<Bipartition>> {
    if n_parties < 2 {
        return Err(Error::InvalidParties(format!(
            "need at least two parties, got {n_parties}"
        )));
    }
    if dims.len() != n_parties {
        return Err(Error::DimensionMismatch(format!(
            "{} local dimensions for {n_parties} parties",
            dims.len()
        )));
    }
    let mut masks: Vec<u64> = (1u64..(1 << n_parties) - 1).filter(|m| m & 1 == 1).collect();
    masks.sort_by_key(|m| {
        let bits: Vec<usize> = (0..n_parties).filter(|p| m >> p & 1 == 1).collect();
        (bits.len(), bits)
    });
    masks
        .into_iter()
        .map(|m| {
            let alpha: Vec<usize> = (0..n_parties).filter(|p| m >> p & 1 == 1).collect();
            Bipartition::new(&alpha, dims)
        })
        .collect()
}

/// For a tensor-product basis over `dims` (party 0 most significant), returns
/// `perm` with `perm[new_index] = old_index` after reordering the parties as
/// `order`.
pub(crate) fn party_permutation(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
    let mut old_strides = vec![1usize; n];
    for p in (0..n.saturating_sub(1)).rev() {
        old_strides[p] = old_strides[p + 1] * dims[p + 1];
    }
    let mut perm = vec![0usize; total];
    let mut digits = vec![0usize; n];
    for (new_index, slot) in perm.iter_mut().enumerate() {
        let mut rem = new_index;
        for q in (0..n).rev() {
            digits[q] = rem % new_dims[q];
            rem /= new_dims[q];
        }
        *slot = order.iter().zip(&digits).map(|(&p, &d)| d * old_strides[p]).sum();
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_power_of_two() {
        assert_eq!(enumerate_bipartitions(2, &[2, 2]).unwrap().len(), 1);
        let three = enumerate_bipartitions(3, &[2, 2, 2]).unwrap();
        let labels: Vec<String> = three.iter().map(|b| b.to_string()).collect();
        assert_eq!(labels, ["0|12", "01|2", "02|1"]);
        assert_eq!(enumerate_bipartitions(4, &[2; 4]).unwrap().len(), 7);
        assert_eq!(enumerate_bipartitions(5, &[2; 5]).unwrap().len(), 15);
    }

    #[test]
    fn rejects_single_party() {
        assert!(enumerate_bipartitions(1, &[2]).is_err());
        assert!(Bipartition::new(&[0, 1], &[2, 2]).is_err());
        assert!(Bipartition::new(&[], &[2, 2]).is_err());
        assert!(Bipartition::new(&[3], &[2, 2]).is_err());
    }

    #[test]
    fn side_dimensions() {
        let bp = Bipartition::new(&[1], &[2, 3, 4]).unwrap();
        assert_eq!(bp.m_alpha(), 3);
        assert_eq!(bp.n_alpha_bar(), 8);
        assert!(!bp.is_canonical());
        let c = bp.canonical();
        assert_eq!(c.alpha(), &[0, 2]);
        assert_eq!(c.m_alpha(), 8);
    }

    #[test]
    fn parses_labels() {
        let dims = [2, 2, 2];
        assert_eq!(Bipartition::parse("0|12", &dims).unwrap().alpha(), &[0]);
        assert_eq!(Bipartition::parse("B|AC", &dims).unwrap().alpha(), &[1]);
        assert_eq!(Bipartition::parse("0,2|1", &dims).unwrap().alpha(), &[0, 2]);
        assert!(Bipartition::parse("012", &dims).is_err());
        assert!(Bipartition::parse("0|7", &dims).is_err());
        assert!(Bipartition::parse("0|1", &dims).is_err());
        assert!(Bipartition::parse("01|12", &dims).is_err());
        let bp: Bipartition = "01|23".parse().unwrap();
        assert_eq!(bp.n_parties(), 4);
    }

    #[test]
    fn permutation_moves_parties() {
        // dims (2,3): swapping parties maps |a b> to |b a>.
        let perm = party_permutation(&[2, 3], &[1, 0]);
        // new index b*2 + a  <-  old index a*3 + b
        for a in 0..2 {
            for b in 0..3 {
                assert_eq!(perm[b * 2 + a], a * 3 + b);
            }
        }
        let id = party_permutation(&[2, 2, 2], &[0, 1, 2]);
        assert_eq!(id, (0..8).collect::<Vec<_>>());
    }
}
