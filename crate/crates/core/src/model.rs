//! The array data model: entries, column-labeled arrays, per-symbol indexing
//! and renaming of symbols.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::hash::Hash;

use num_integer::Integer;
use thiserror::Error;

use crate::combinat::{RelaySet, MAX_GROUND};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("duplicate column label {0}")]
    DuplicateLabel(RelaySet),
    #[error("bad column label {label}: {message}")]
    Label { label: RelaySet, message: String },
}

/// One cell: either cached (`*`) or an ordinary symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Entry<S = u32> {
    Star,
    Symbol(S),
}

impl<S> Entry<S> {
    pub fn is_star(&self) -> bool {
        matches!(self, Entry::Star)
    }

    pub fn symbol(&self) -> Option<&S> {
        match self {
            Entry::Star => None,
            Entry::Symbol(s) => Some(s),
        }
    }
}

/// Pre-canonical symbol name produced by the set-system generators: a pair
/// of relay sets such as `(23,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetSystemLabel {
    pub first: RelaySet,
    pub second: RelaySet,
}

impl SetSystemLabel {
    pub fn new(first: RelaySet, second: RelaySet) -> Self {
        SetSystemLabel { first, second }
    }
}

impl fmt::Display for SetSystemLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.first.compact(), self.second.compact())
    }
}

/// An `F x K` array whose columns are labeled by distinct `r`-subsets of `[H]`.
///
/// Rows are stored densely; the symbol type is generic so that generators can
/// keep their structured names until [`PdaArray::canonical_relabel`] maps
/// them to `1..=S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdaArray<S = u32> {
    h: usize,
    r: usize,
    col_labels: Vec<RelaySet>,
    rows: Vec<Vec<Entry<S>>>,
    row_labels: Option<Vec<String>>,
}

impl<S> PdaArray<S> {
    pub fn new(
        h: usize,
        r: usize,
        col_labels: Vec<RelaySet>,
        rows: Vec<Vec<Entry<S>>>,
    ) -> Result<Self, ModelError> {
        if h > MAX_GROUND {
            return Err(ModelError::Dimension(format!(
                "H = {h} exceeds {MAX_GROUND}"
            )));
        }
        if r > h {
            return Err(ModelError::Dimension(format!("r = {r} exceeds H = {h}")));
        }
        let mut seen = HashSet::with_capacity(col_labels.len());
        for &label in &col_labels {
            if label.len() != r {
                return Err(ModelError::Label {
                    label,
                    message: format!("expected {r} relays"),
                });
            }
            if label.max_member() > h {
                return Err(ModelError::Label {
                    label,
                    message: format!("relay outside 1..={h}"),
                });
            }
            if !seen.insert(label) {
                return Err(ModelError::DuplicateLabel(label));
            }
        }
        for (j, row) in rows.iter().enumerate() {
            if row.len() != col_labels.len() {
                return Err(ModelError::Dimension(format!(
                    "row {} has {} entries, expected {}",
                    j + 1,
                    row.len(),
                    col_labels.len()
                )));
            }
        }
        Ok(PdaArray {
            h,
            r,
            col_labels,
            rows,
            row_labels: None,
        })
    }

    /// Attaches descriptive row labels (one per row).
    pub fn with_row_labels(mut self, labels: Vec<String>) -> Result<Self, ModelError> {
        if labels.len() != self.rows.len() {
            return Err(ModelError::Dimension(format!(
                "{} row labels for {} rows",
                labels.len(),
                self.rows.len()
            )));
        }
        self.row_labels = Some(labels);
        Ok(self)
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Number of rows (packets per file before splitting).
    pub fn f(&self) -> usize {
        self.rows.len()
    }

    /// Number of columns (users).
    pub fn k(&self) -> usize {
        self.col_labels.len()
    }

    pub fn col_labels(&self) -> &[RelaySet] {
        &self.col_labels
    }

    pub fn col_label(&self, col: usize) -> RelaySet {
        self.col_labels[col]
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn rows(&self) -> &[Vec<Entry<S>>] {
        &self.rows
    }

    pub fn get(&self, row: usize, col: usize) -> &Entry<S> {
        &self.rows[row][col]
    }

    /// Replaces one cell. Used to build mutants of valid arrays.
    pub fn set(&mut self, row: usize, col: usize, entry: Entry<S>) {
        self.rows[row][col] = entry;
    }

    pub fn column_of(&self, label: RelaySet) -> Option<usize> {
        self.col_labels.iter().position(|&l| l == label)
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, &Entry<S>)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(j, row)| row.iter().enumerate().map(move |(k, e)| (j, k, e)))
    }

    pub fn star_count(&self, col: usize) -> usize {
        self.rows.iter().filter(|row| row[col].is_star()).count()
    }

    pub fn same_star_pattern<T>(&self, other: &PdaArray<T>) -> bool {
        self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.is_star() == y.is_star())
            })
    }

    pub fn map_symbols<T, M: FnMut(&S) -> T>(&self, mut f: M) -> PdaArray<T> {
        PdaArray {
            h: self.h,
            r: self.r,
            col_labels: self.col_labels.clone(),
            rows: self
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| match e {
                            Entry::Star => Entry::Star,
                            Entry::Symbol(s) => Entry::Symbol(f(s)),
                        })
                        .collect()
                })
                .collect(),
            row_labels: self.row_labels.clone(),
        }
    }
}

impl<S: Clone + Eq + Hash> PdaArray<S> {
    /// Renames symbols to `1..=S` in first-occurrence order of a row-major scan.
    pub fn canonical_relabel(&self) -> PdaArray<u32> {
        let mut names: HashMap<&S, u32> = HashMap::new();
        let mut order: Vec<&S> = Vec::new();
        for (_, _, e) in self.cells() {
            if let Entry::Symbol(s) = e {
                if !names.contains_key(s) {
                    order.push(s);
                    names.insert(s, order.len() as u32);
                }
            }
        }
        self.map_symbols(|s| names[s])
    }

    pub fn symbol_index(&self) -> SymbolIndex<S> {
        build_symbol_index(self)
    }

    pub fn symbol_count(&self) -> usize {
        self.cells()
            .filter_map(|(_, _, e)| e.symbol())
            .collect::<HashSet<_>>()
            .len()
    }
}

/// True iff both arrays have the same shape, column labels and star
/// positions, and some bijection of symbol names maps one onto the other.
pub fn equivalent_up_to_symbols<S, T>(a: &PdaArray<S>, b: &PdaArray<T>) -> bool
where
    S: Clone + Eq + Hash,
    T: Clone + Eq + Hash,
{
    a.h == b.h
        && a.r == b.r
        && a.col_labels == b.col_labels
        && a.same_star_pattern(b)
        && a.canonical_relabel().rows == b.canonical_relabel().rows
}

/// Everything known about one symbol of an array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolInfo<S> {
    pub symbol: S,
    /// `(row, column)` cells in row-major order.
    pub occurrences: Vec<(usize, usize)>,
    /// Relays shared by every column containing the symbol (`I_s`).
    pub intersection: RelaySet,
}

impl<S> SymbolInfo<S> {
    /// `w_s`, the number of relays the coded signal is split across.
    pub fn width(&self) -> usize {
        self.intersection.len()
    }

    pub fn columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.occurrences.iter().map(|&(_, k)| k)
    }
}

/// Per-symbol occurrence lists and relay intersections, in first-occurrence order.
#[derive(Debug, Clone)]
pub struct SymbolIndex<S> {
    symbols: Vec<SymbolInfo<S>>,
    lookup: HashMap<S, usize>,
}

impl<S: Clone + Eq + Hash> SymbolIndex<S> {
    pub fn get(&self, symbol: &S) -> Option<&SymbolInfo<S>> {
        self.lookup.get(symbol).map(|&i| &self.symbols[i])
    }
}

impl<S> SymbolIndex<S> {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SymbolInfo<S>> {
        self.symbols.iter()
    }

    /// Symbols whose covering columns share no relay. Such an array is not a CPDA.
    pub fn empty_intersections(&self) -> impl Iterator<Item = &SymbolInfo<S>> {
        self.symbols.iter().filter(|s| s.intersection.is_empty())
    }

    /// Count of symbols per width `w_s`.
    pub fn width_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for s in &self.symbols {
            *hist.entry(s.width()).or_insert(0) += 1;
        }
        hist
    }

    /// `lcm{w_s}` over symbols with a nonempty intersection; 1 when there are none.
    pub fn width_lcm(&self) -> usize {
        self.symbols
            .iter()
            .map(SymbolInfo::width)
            .filter(|&w| w > 0)
            .fold(1, |acc, w| acc.lcm(&w))
    }
}

/// Groups the non-star cells of `array` by symbol and folds the column
/// labels of each group into its relay intersection.
pub fn build_symbol_index<S: Clone + Eq + Hash>(array: &PdaArray<S>) -> SymbolIndex<S> {
    let mut symbols: Vec<SymbolInfo<S>> = Vec::new();
    let mut lookup: HashMap<S, usize> = HashMap::new();
    for (j, k, e) in array.cells() {
        let Entry::Symbol(s) = e else { continue };
        let label = array.col_labels[k];
        match lookup.get(s) {
            Some(&i) => {
                let info = &mut symbols[i];
                info.occurrences.push((j, k));
                info.intersection = info.intersection.intersection(label);
            }
            None => {
                lookup.insert(s.clone(), symbols.len());
                symbols.push(SymbolInfo {
                    symbol: s.clone(),
                    occurrences: vec![(j, k)],
                    intersection: label,
                });
            }
        }
    }
    SymbolIndex { symbols, lookup }
}
