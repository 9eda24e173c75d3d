//! Clustering methods and their distance update formulas.
//!
//! Every method is described twice:
//!
//! * by the classical pairwise recurrence, giving `D(X_i ∪ X_i', X_j)` from the
//!   three distances among `X_i`, `X_i'` and `X_j` ([`pair_update`]);
//! * by its generalisation to two superclusters `X_I = ∪_{i∈I} X_i` and
//!   `X_J = ∪_{j∈J} X_j` that may each be formed by any number of clusters at
//!   once ([`group_distance`]).
//!
//! Throughout, `|X_i|` is the number of individuals in cluster `X_i`, `|I|` is
//! the number of clusters joined into a supercluster, and `|X_I|` is the total
//! number of individuals in it, `Σ_{i∈I} |X_i|`.
//!
//! Coefficients are evaluated from integer sizes on every call.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    SingleLinkage,
    CompleteLinkage,
    UnweightedAverage,
    WeightedAverage,
    UnweightedCentroid,
    WeightedCentroid,
    Ward,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::SingleLinkage,
        Method::CompleteLinkage,
        Method::UnweightedAverage,
        Method::WeightedAverage,
        Method::UnweightedCentroid,
        Method::WeightedCentroid,
        Method::Ward,
    ];

    /// Human-readable name, e.g. `"Complete Linkage"`.
    pub fn name(self) -> &'static str {
        match self {
            Method::SingleLinkage => "Single Linkage",
            Method::CompleteLinkage => "Complete Linkage",
            Method::UnweightedAverage => "Unweighted Average",
            Method::WeightedAverage => "Weighted Average",
            Method::UnweightedCentroid => "Unweighted Centroid",
            Method::WeightedCentroid => "Weighted Centroid",
            Method::Ward => "Ward",
        }
    }

    /// Lowercase identifier used in file names, e.g. `"complete_linkage"`.
    pub fn slug(self) -> String {
        self.name().to_ascii_lowercase().replace(' ', "_")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    /// Case-insensitive; `_`, `-` and spaces are interchangeable.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.trim().chars().map(|c| if c == '-' || c == ' ' { '_' } else { c.to_ascii_lowercase() }).collect();
        Method::ALL.into_iter().find(|m| m.slug() == key).ok_or_else(|| format!("unknown clustering method {s:?}"))
    }
}

/// Coefficients of the pairwise recurrence for one merge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCoefficients {
    pub alpha_i: f64,
    pub alpha_i_prime: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PairCoefficients {
    /// Coefficients for merging `X_i` (size `ni`) with `X_i'` (size `ni_prime`)
    /// as seen from `X_j` (size `nj`).
    pub fn new(method: Method, ni: usize, ni_prime: usize, nj: usize) -> Self {
        let (ni, nip, nj) = (ni as f64, ni_prime as f64, nj as f64);
        let (alpha_i, alpha_i_prime, beta, gamma) = match method {
            Method::SingleLinkage => (0.5, 0.5, 0.0, -0.5),
            Method::CompleteLinkage => (0.5, 0.5, 0.0, 0.5),
            Method::UnweightedAverage => (ni / (ni + nip), nip / (ni + nip), 0.0, 0.0),
            Method::WeightedAverage => (0.5, 0.5, 0.0, 0.0),
            Method::UnweightedCentroid => {
                let sum = ni + nip;
                (ni / sum, nip / sum, -(ni * nip) / (sum * sum), 0.0)
            }
            Method::WeightedCentroid => (0.5, 0.5, -0.25, 0.0),
            Method::Ward => {
                let total = ni + nip + nj;
                ((ni + nj) / total, (nip + nj) / total, -nj / total, 0.0)
            }
        };
        Self { alpha_i, alpha_i_prime, beta, gamma }
    }
}

/// Distance from `X_i ∪ X_i'` to `X_j` given `d_ij = D(X_i, X_j)`,
/// `d_i_prime_j = D(X_i', X_j)` and `d_ii_prime = D(X_i, X_i')`. No rounding
/// is applied.
pub fn pair_update(method: Method, ni: usize, ni_prime: usize, nj: usize, d_ij: f64, d_i_prime_j: f64, d_ii_prime: f64) -> f64 {
    let c = PairCoefficients::new(method, ni, ni_prime, nj);
    c.alpha_i * d_ij + c.alpha_i_prime * d_i_prime_j + c.beta * d_ii_prime + c.gamma * (d_ij - d_i_prime_j).abs()
}

/// The `δ` switch of the group formula. Only the two extreme linkages have
/// non-zero `γ`, and only they define `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delta {
    Zero,
    One,
    Unused,
}

/// Group-formula coefficients for one pair of superclusters `(X_I, X_J)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupCoefficients {
    method: Method,
    /// `|I|` and `|J|`.
    card_i: f64,
    card_j: f64,
    /// `|X_I|` and `|X_J|`.
    total_i: f64,
    total_j: f64,
}

impl GroupCoefficients {
    pub fn new(method: Method, sizes_i: &[usize], sizes_j: &[usize]) -> Self {
        Self {
            method,
            card_i: sizes_i.len() as f64,
            card_j: sizes_j.len() as f64,
            total_i: sizes_i.iter().sum::<usize>() as f64,
            total_j: sizes_j.iter().sum::<usize>() as f64,
        }
    }

    /// `α_ij` for a member of size `xi` in `X_I` and one of size `xj` in `X_J`.
    pub fn alpha(&self, xi: usize, xj: usize) -> f64 {
        let (xi, xj) = (xi as f64, xj as f64);
        match self.method {
            Method::UnweightedAverage | Method::UnweightedCentroid => (xi * xj) / (self.total_i * self.total_j),
            Method::Ward => (xi + xj) / (self.total_i + self.total_j),
            _ => 1.0 / (self.card_i * self.card_j),
        }
    }

    /// `β_ii'` for two members of `X_I`.
    pub fn beta_i(&self, xi: usize, xi_prime: usize) -> f64 {
        self.beta_within(self.card_i, self.total_i, self.total_j, xi, xi_prime)
    }

    /// `β_jj'` for two members of `X_J`: the same expression with `I` and `J`
    /// exchanged.
    pub fn beta_j(&self, xj: usize, xj_prime: usize) -> f64 {
        self.beta_within(self.card_j, self.total_j, self.total_i, xj, xj_prime)
    }

    fn beta_within(&self, card_own: f64, total_own: f64, total_other: f64, a: usize, b: usize) -> f64 {
        let (a, b) = (a as f64, b as f64);
        match self.method {
            Method::UnweightedCentroid => -(a * b) / (total_own * total_own),
            Method::WeightedCentroid => -1.0 / (card_own * card_own),
            Method::Ward => -(total_other / total_own) * ((a + b) / (total_own + total_other)),
            _ => 0.0,
        }
    }

    /// `γ_ij`, identical for every pair of members.
    pub fn gamma(&self) -> f64 {
        match self.method {
            Method::SingleLinkage | Method::CompleteLinkage => 1.0 / (self.card_i * self.card_j),
            _ => 0.0,
        }
    }

    pub fn delta(&self) -> Delta {
        match self.method {
            Method::SingleLinkage => Delta::Zero,
            Method::CompleteLinkage => Delta::One,
            _ => Delta::Unused,
        }
    }
}

/// Everything the group formula needs about two superclusters.
///
/// `cross` is the `|I| × |J|` block of member distances, row-major by `I`.
/// `within_i` lists `D(X_i, X_i')` for the member pairs `i < i'` of `I` in
/// row-major upper-triangle order; `within_j` likewise for `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupDistanceInput {
    pub sizes_i: Vec<usize>,
    pub sizes_j: Vec<usize>,
    pub cross: Vec<f64>,
    pub within_i: Vec<f64>,
    pub within_j: Vec<f64>,
}

impl GroupDistanceInput {
    /// `D_max(X_I, X_J)`, the largest member-to-member distance.
    pub fn d_max(&self) -> f64 {
        self.cross.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `D_min(X_I, X_J)`, the smallest member-to-member distance.
    pub fn d_min(&self) -> f64 {
        self.cross.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The same input with the roles of `I` and `J` exchanged.
    pub fn swapped(&self) -> Self {
        let (p, q) = (self.sizes_i.len(), self.sizes_j.len());
        let mut cross = Vec::with_capacity(p * q);
        for j in 0..q {
            for i in 0..p {
                cross.push(self.cross[i * q + j]);
            }
        }
        Self {
            sizes_i: self.sizes_j.clone(),
            sizes_j: self.sizes_i.clone(),
            cross,
            within_i: self.within_j.clone(),
            within_j: self.within_i.clone(),
        }
    }
}

/// Distance between superclusters `X_I` and `X_J`.
///
/// With `|I| = |J| = 1` this is the stored distance itself. Terms are summed
/// in ascending order so the result does not depend on member order.
pub fn group_distance(method: Method, input: &GroupDistanceInput) -> f64 {
    let (p, q) = (input.sizes_i.len(), input.sizes_j.len());
    debug_assert!(p >= 1 && q >= 1);
    debug_assert_eq!(input.cross.len(), p * q);
    debug_assert_eq!(input.within_i.len(), p * (p - 1) / 2);
    debug_assert_eq!(input.within_j.len(), q * (q - 1) / 2);
    if p == 1 && q == 1 {
        return input.cross[0];
    }

    let c = GroupCoefficients::new(method, &input.sizes_i, &input.sizes_j);
    let mut terms = Vec::with_capacity(2 * p * q + input.within_i.len() + input.within_j.len());

    for (i, &xi) in input.sizes_i.iter().enumerate() {
        for (j, &xj) in input.sizes_j.iter().enumerate() {
            terms.push(c.alpha(xi, xj) * input.cross[i * q + j]);
        }
    }
    push_within(&mut terms, &input.sizes_i, &input.within_i, |a, b| c.beta_i(a, b));
    push_within(&mut terms, &input.sizes_j, &input.within_j, |a, b| c.beta_j(a, b));

    let gamma = c.gamma();
    match c.delta() {
        Delta::One => {
            let d_max = input.d_max();
            terms.extend(input.cross.iter().map(|&d| gamma * (d_max - d)));
        }
        Delta::Zero => {
            let d_min = input.d_min();
            terms.extend(input.cross.iter().map(|&d| -(gamma * (d - d_min))));
        }
        Delta::Unused => {}
    }

    terms.sort_by(f64::total_cmp);
    terms.into_iter().sum()
}

fn push_within(terms: &mut Vec<f64>, sizes: &[usize], within: &[f64], beta: impl Fn(usize, usize) -> f64) {
    let mut k = 0;
    for a in 0..sizes.len() {
        for b in a + 1..sizes.len() {
            let coefficient = beta(sizes[a], sizes[b]);
            if coefficient != 0.0 {
                terms.push(coefficient * within[k]);
            }
            k += 1;
        }
    }
}
