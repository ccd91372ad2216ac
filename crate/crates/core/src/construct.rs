//! Deterministic array generators.
//!
//! Rows and columns follow lexicographic subset order. Symbols are emitted as
//! structured names (relay sets or [`SetSystemLabel`] pairs); call
//! [`PdaArray::canonical_relabel`] for integer symbols.

use std::fmt;

use thiserror::Error;

use crate::combinat::{enumerate_subsets, RelaySet, MAX_GROUND};
use crate::model::{Entry, PdaArray, SetSystemLabel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid parameters: {0}")]
pub struct ParamError(pub String);

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), ParamError> {
    if cond {
        Ok(())
    } else {
        Err(ParamError(msg()))
    }
}

/// MN array for `k` users and cache parameter `t`.
///
/// Rows are the `t`-subsets of `[k]`, columns the singletons `{1}..{k}`.
/// Cell `(T, {c})` is a star when `c in T` and the symbol `T + {c}` otherwise.
pub fn mn_pda(k: usize, t: usize) -> Result<PdaArray<RelaySet>, ParamError> {
    require(k <= MAX_GROUND, || format!("k must be <= {MAX_GROUND}"))?;
    require(0 < t && t < k, || {
        format!("need 0 < t < k, got k = {k}, t = {t}")
    })?;
    let rows_sets = enumerate_subsets(k, t).expect("t < k");
    let cols = enumerate_subsets(k, 1).expect("k >= 1");
    let rows = rows_sets
        .iter()
        .map(|&row| {
            cols.iter()
                .map(|&col| {
                    if col.is_subset(row) {
                        Entry::Star
                    } else {
                        Entry::Symbol(row.union(col))
                    }
                })
                .collect()
        })
        .collect();
    let labels = rows_sets.iter().map(|s| s.to_string()).collect();
    Ok(PdaArray::new(k, 1, cols, rows)
        .expect("generator output is well-formed")
        .with_row_labels(labels)
        .expect("one label per row"))
}

/// Which symbol rule of the subset construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Symbol `((A u B) - I, I)`.
    P,
    /// Symbol `((A u B) - I, A - B)`.
    PPrime,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::P => "P",
            Variant::PPrime => "P'",
        })
    }
}

/// Parameters of the subset construction over `[H]`: columns are `r`-subsets,
/// rows `b`-subsets, and a cell is non-star when the two meet in exactly
/// `lambda` relays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Construction1Params {
    pub h: usize,
    pub r: usize,
    pub b: usize,
    pub lambda: usize,
}

impl Construction1Params {
    pub fn new(h: usize, r: usize, b: usize, lambda: usize) -> Result<Self, ParamError> {
        require(h <= MAX_GROUND, || format!("H must be <= {MAX_GROUND}"))?;
        require(0 < r && r < h, || {
            format!("need 0 < r < H, got r = {r}, H = {h}")
        })?;
        require(0 < b && b < h, || {
            format!("need 0 < b < H, got b = {b}, H = {h}")
        })?;
        require(lambda >= 1, || "lambda must be >= 1".to_string())?;
        require(lambda <= r.min(b), || {
            format!("lambda must be <= min(r, b) = {}", r.min(b))
        })?;
        require(r + b - 2 * lambda < h, || {
            format!(
                "need r + b - 2*lambda < H, got {} >= {h}",
                r + b - 2 * lambda
            )
        })?;
        Ok(Construction1Params { h, r, b, lambda })
    }

    /// `|C| = r + b - 2*lambda`, the size of the first component of every symbol.
    pub fn core_size(&self) -> usize {
        self.r + self.b - 2 * self.lambda
    }

    /// Every admissible tuple with the given `H`, in `(r, b, lambda)` order.
    pub fn all_for(h: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for r in 1..h {
            for b in 1..h {
                for lambda in 1..=r.min(b) {
                    if let Ok(p) = Self::new(h, r, b, lambda) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    /// Whether the closed-form parameters (rate, packet number) describe the
    /// generated array exactly. Outside this region the arrays are still
    /// generated, but some symbols cover a single column (`w_s = r`), the
    /// array has no symbols at all, or (for `P'` with `lambda = r`) the
    /// relay intersections are empty.
    pub fn is_regular(&self, variant: Variant) -> bool {
        let Construction1Params { h, r, b, lambda } = *self;
        match variant {
            Variant::P => lambda < b && r + b - lambda <= h,
            Variant::PPrime => lambda < r && r + b - lambda < h,
        }
    }
}

impl fmt::Display for Construction1Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "H={} r={} b={} lambda={}",
            self.h, self.r, self.b, self.lambda
        )
    }
}

fn construction1(params: &Construction1Params, variant: Variant) -> PdaArray<SetSystemLabel> {
    let Construction1Params { h, r, b, lambda } = *params;
    let cols = enumerate_subsets(h, r).expect("r < H");
    let row_sets = enumerate_subsets(h, b).expect("b < H");
    let rows = row_sets
        .iter()
        .map(|&row| {
            cols.iter()
                .map(|&col| {
                    let meet = col.intersection(row);
                    if meet.len() != lambda {
                        return Entry::Star;
                    }
                    let core = col.union(row).difference(meet);
                    let second = match variant {
                        Variant::P => meet,
                        Variant::PPrime => col.difference(row),
                    };
                    Entry::Symbol(SetSystemLabel::new(core, second))
                })
                .collect()
        })
        .collect();
    let labels = row_sets
        .iter()
        .map(|s| format!("B={}", s.compact()))
        .collect();
    PdaArray::new(h, r, cols, rows)
        .expect("generator output is well-formed")
        .with_row_labels(labels)
        .expect("one label per row")
}

/// Subset construction with symbols `((A u B) - I, I)`, `I = A n B`.
pub fn construction1_p(params: &Construction1Params) -> PdaArray<SetSystemLabel> {
    construction1(params, Variant::P)
}

/// Subset construction with symbols `((A u B) - I, A - B)`.
pub fn construction1_pprime(params: &Construction1Params) -> PdaArray<SetSystemLabel> {
    construction1(params, Variant::PPrime)
}

pub fn construction1_variant(
    params: &Construction1Params,
    variant: Variant,
) -> PdaArray<SetSystemLabel> {
    construction1(params, variant)
}

/// Parameters of the generalized construction: rows are pairs `(B, G)` with
/// `G` a `lambda`-subset of the `b`-subset `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Construction2Params {
    pub h: usize,
    pub r: usize,
    pub b: usize,
    pub lambda: usize,
}

impl Construction2Params {
    pub fn new(h: usize, r: usize, b: usize, lambda: usize) -> Result<Self, ParamError> {
        require(h <= MAX_GROUND, || format!("H must be <= {MAX_GROUND}"))?;
        require(r >= 1, || "r must be >= 1".to_string())?;
        require(lambda >= 1, || "lambda must be >= 1".to_string())?;
        require(lambda < b, || {
            format!("need lambda < b, got lambda = {lambda}, b = {b}")
        })?;
        require(b < r + lambda, || {
            format!(
                "need b < r + lambda, got b = {b}, r + lambda = {}",
                r + lambda
            )
        })?;
        require(r + lambda < h, || {
            format!(
                "need r + lambda < H, got r + lambda = {}, H = {h}",
                r + lambda
            )
        })?;
        Ok(Construction2Params { h, r, b, lambda })
    }

    /// `w = r + lambda - b`, the common relay-intersection size of every symbol.
    pub fn width(&self) -> usize {
        self.r + self.lambda - self.b
    }

    /// Every admissible tuple with the given `H`, in `(r, b, lambda)` order.
    pub fn all_for(h: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for r in 1..h {
            for b in 2..h {
                for lambda in 1..b {
                    if let Ok(p) = Self::new(h, r, b, lambda) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Construction2Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "H={} r={} b={} lambda={}",
            self.h, self.r, self.b, self.lambda
        )
    }
}

/// Cell `((B, G), A)` is `(A u G, A - B)` when `A n G` is empty and
/// `B` is contained in `A u G`, and a star otherwise.
pub fn construction2(params: &Construction2Params) -> PdaArray<SetSystemLabel> {
    let Construction2Params { h, r, b, lambda } = *params;
    let cols = enumerate_subsets(h, r).expect("r < H");
    let mut row_keys: Vec<(RelaySet, RelaySet)> = Vec::new();
    for big in enumerate_subsets(h, b).expect("b < H") {
        let members = big.to_vec();
        for pick in enumerate_subsets(b, lambda).expect("lambda < b") {
            let gamma = RelaySet::of(&pick.iter().map(|i| members[i - 1]).collect::<Vec<_>>());
            row_keys.push((big, gamma));
        }
    }
    let rows = row_keys
        .iter()
        .map(|&(big, gamma)| {
            cols.iter()
                .map(|&col| {
                    let cover = col.union(gamma);
                    if col.is_disjoint(gamma) && big.is_subset(cover) {
                        Entry::Symbol(SetSystemLabel::new(cover, col.difference(big)))
                    } else {
                        Entry::Star
                    }
                })
                .collect()
        })
        .collect();
    let labels = row_keys
        .iter()
        .map(|(big, gamma)| format!("B={},G={}", big.compact(), gamma.compact()))
        .collect();
    PdaArray::new(h, r, cols, rows)
        .expect("generator output is well-formed")
        .with_row_labels(labels)
        .expect("one label per row")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::binomial_usize;
    use crate::fixtures;
    use crate::model::equivalent_up_to_symbols;
    use crate::validate::validate;

    fn s(m: &[usize]) -> RelaySet {
        RelaySet::of(m)
    }

    fn cell<S: Clone>(a: &PdaArray<S>, row: usize, col: RelaySet) -> Entry<S> {
        a.get(row, a.column_of(col).unwrap()).clone()
    }

    #[test]
    fn mn_small_cases() {
        let a = mn_pda(2, 1).unwrap();
        assert_eq!(a.f(), 2);
        assert_eq!(a.k(), 2);
        assert!(a.get(0, 0).is_star() && a.get(1, 1).is_star());
        assert_eq!(a.get(0, 1), a.get(1, 0));

        let r = validate(&mn_pda(4, 2).unwrap(), false);
        assert!(r.is_pda);
        assert_eq!(r.params(), (4, 6, Some(3), 4));
        for count in crate::validate::symbol_multiplicities(&mn_pda(5, 2).unwrap()).values() {
            assert_eq!(*count, 3);
        }
        assert!(mn_pda(4, 0).is_err());
        assert!(mn_pda(4, 4).is_err());
    }

    #[test]
    fn construction1_printed_cells() {
        let params = Construction1Params::new(5, 3, 1, 1).unwrap();
        let p = construction1_p(&params);
        assert_eq!(
            cell(&p, 0, s(&[1, 2, 3])),
            Entry::Symbol(SetSystemLabel::new(s(&[2, 3]), s(&[1])))
        );
        assert_eq!(p.get(0, 0).symbol().unwrap().to_string(), "(23,1)");
        assert!(cell(&p, 3, s(&[1, 2, 3])).is_star());
        // the published array prints (45,2) here; the rule gives (24,5)
        assert_eq!(
            cell(&p, 4, s(&[2, 4, 5])),
            Entry::Symbol(SetSystemLabel::new(s(&[2, 4]), s(&[5])))
        );

        let pp = construction1_pprime(&params);
        assert_eq!(
            cell(&pp, 0, s(&[1, 2, 3])),
            Entry::Symbol(SetSystemLabel::new(s(&[2, 3]), s(&[2, 3])))
        );
        assert!(p.same_star_pattern(&pp));
        assert_eq!(pp.row_labels().unwrap()[0], "B=1");
    }

    #[test]
    fn pprime_matches_example() {
        let params = Construction1Params::new(5, 3, 1, 1).unwrap();
        assert!(equivalent_up_to_symbols(
            &construction1_pprime(&params),
            &fixtures::example1()
        ));
        assert!(!equivalent_up_to_symbols(
            &construction1_p(&params),
            &fixtures::example1()
        ));
    }

    #[test]
    fn construction1_validation() {
        let params = Construction1Params::new(5, 3, 1, 1).unwrap();
        let p = validate(&construction1_p(&params), true);
        assert!(p.is_cpda);
        // C(5,2) * C(3,1)
        assert_eq!(p.params(), (10, 5, Some(2), 30));
        let pp = validate(&construction1_pprime(&params), true);
        assert!(pp.is_cpda);
        assert_eq!(pp.params(), (10, 5, Some(2), 10));

        let special = Construction1Params::new(5, 3, 2, 2).unwrap();
        let r = validate(&construction1_pprime(&special), true);
        assert!(r.is_cpda);
        assert_eq!(r.params(), (10, 10, Some(7), 5));
    }

    #[test]
    fn construction1_rejects_bad_params() {
        assert_eq!(
            Construction1Params::new(3, 2, 2, 0).unwrap_err().0,
            "lambda must be >= 1"
        );
        assert!(Construction1Params::new(5, 5, 1, 1).is_err());
        assert!(Construction1Params::new(5, 3, 1, 2).is_err());
        // r + b - 2*lambda = 5 >= H
        assert!(Construction1Params::new(5, 3, 4, 1).is_err());
    }

    #[test]
    fn pprime_with_full_lambda_is_not_cpda() {
        // lambda = r makes A - B empty for every non-star cell
        let params = Construction1Params::new(5, 2, 3, 2).unwrap();
        assert!(!params.is_regular(Variant::PPrime));
        let r = validate(&construction1_pprime(&params), true);
        assert!(r.is_pda);
        assert!(!r.is_cpda);
    }

    #[test]
    fn construction1_column_structure() {
        for h in 3..=7 {
            for r in 1..h {
                for b in 1..h {
                    for lambda in 1..=r.min(b) {
                        let Ok(params) = Construction1Params::new(h, r, b, lambda) else {
                            continue;
                        };
                        let nonstar = binomial_usize(r, lambda) * binomial_usize(h - r, b - lambda);
                        let p = construction1_p(&params);
                        for k in 0..p.k() {
                            assert_eq!(p.f() - p.star_count(k), nonstar, "{params}");
                        }
                        // each (C, I) covers {A' + I : A' in C choose r - lambda}
                        let index = p.symbol_index();
                        let cover = binomial_usize(params.core_size(), r - lambda);
                        for info in index.iter() {
                            assert_eq!(info.occurrences.len(), cover, "{params}");
                            assert!(!info.intersection.is_empty());
                            if params.is_regular(Variant::P) {
                                assert_eq!(info.intersection, info.symbol.second, "{params}");
                            }
                            for col in info.columns() {
                                let label = p.col_label(col);
                                assert!(info.symbol.second.is_subset(label));
                                assert!(label
                                    .difference(info.symbol.second)
                                    .is_subset(info.symbol.first));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn construction2_cells() {
        let params = Construction2Params::new(5, 2, 2, 1).unwrap();
        let a = construction2(&params);
        assert_eq!(a.row_labels().unwrap()[0], "B=12,G=1");
        assert_eq!(
            cell(&a, 0, s(&[2, 3])),
            Entry::Symbol(SetSystemLabel::new(s(&[1, 2, 3]), s(&[3])))
        );
        assert!(cell(&a, 0, s(&[3, 4])).is_star());
        let r = validate(&a, true);
        assert!(r.is_cpda);
        assert_eq!(r.params(), (10, 20, Some(14), 30));
        assert_eq!(r.w_histogram, std::collections::BTreeMap::from([(1, 30)]));
    }

    #[test]
    fn construction2_rejects_bad_params() {
        assert!(Construction2Params::new(5, 2, 1, 1).is_err()); // lambda < b
        assert!(Construction2Params::new(5, 2, 3, 1).is_err()); // b < r + lambda
        assert!(Construction2Params::new(4, 2, 2, 2).is_err());
        assert!(Construction2Params::new(5, 3, 3, 2).is_err()); // r + lambda < H
    }

    #[test]
    fn construction2_symbol_structure() {
        for h in 3..=7 {
            for r in 1..h {
                for b in 1..h {
                    for lambda in 1..b {
                        let Ok(params) = Construction2Params::new(h, r, b, lambda) else {
                            continue;
                        };
                        let a = construction2(&params);
                        let nonstar = binomial_usize(h - r, lambda) * binomial_usize(r, b - lambda);
                        for k in 0..a.k() {
                            assert_eq!(a.f() - a.star_count(k), nonstar, "{params}");
                        }
                        for info in a.symbol_index().iter() {
                            let sym = info.symbol;
                            assert_eq!(sym.first.len(), r + lambda);
                            assert_eq!(sym.second.len(), params.width());
                            assert!(sym.second.is_subset(sym.first));
                            assert_eq!(info.intersection, sym.second, "{params}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let params = Construction1Params::new(6, 3, 2, 1).unwrap();
        let a = crate::format::write_array(&construction1_pprime(&params).canonical_relabel());
        let b = crate::format::write_array(&construction1_pprime(&params).canonical_relabel());
        assert_eq!(a, b);
        let p2 = Construction2Params::new(6, 3, 2, 1).unwrap();
        assert_eq!(construction2(&p2), construction2(&p2));
    }

    #[test]
    fn grid_sizes() {
        let c1: usize = (3..=8).map(|h| Construction1Params::all_for(h).len()).sum();
        let c2: usize = (3..=8).map(|h| Construction2Params::all_for(h).len()).sum();
        assert_eq!((c1, c2), (289, 70));
        assert!(Construction1Params::all_for(5)
            .contains(&Construction1Params::new(5, 3, 1, 1).unwrap()));
    }
}
