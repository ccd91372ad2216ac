//! Axiom checks for placement delivery arrays.
//!
//! * C1: every column holds the same number `Z` of stars.
//! * C2a: two cells carrying the same symbol lie in distinct rows and columns.
//! * C2b: the cross cells of such a pair are both stars.
//! * C3: the labels of the columns containing a symbol share at least one relay.
//!
//! Checks never fail on bad input; every broken axiom becomes a
//! [`Violation`] whose witness can be re-checked against the array.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Display};
use std::hash::Hash;

use itertools::Itertools;

use crate::combinat::RelaySet;
use crate::model::{Entry, PdaArray, SymbolIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    C1,
    C2a,
    C2b,
    C3,
}

impl Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::C1 => "C1",
            Axiom::C2a => "C2a",
            Axiom::C2b => "C2b",
            Axiom::C3 => "C3",
        })
    }
}

/// Cells and columns that exhibit a violation. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// A column whose star count differs from a reference column's.
    StarCount {
        col: usize,
        label: RelaySet,
        stars: usize,
        reference_col: usize,
        reference_stars: usize,
    },
    /// Two cells holding the same symbol, i.e. the corners of a 2x2 sub-array.
    Pair {
        symbol: String,
        cells: [(usize, usize); 2],
        labels: [RelaySet; 2],
    },
    /// The columns covering a symbol whose labels have empty intersection,
    /// with one cell of the symbol per column.
    Covering {
        symbol: String,
        cells: Vec<(usize, usize)>,
        cols: Vec<usize>,
        labels: Vec<RelaySet>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Witness,
}

impl Violation {
    /// Re-checks the violation by looking only at the witnessed cells.
    pub fn reverify<S: PartialEq>(&self, array: &PdaArray<S>) -> bool {
        match (&self.axiom, &self.witness) {
            (
                Axiom::C1,
                Witness::StarCount {
                    col, reference_col, ..
                },
            ) => array.star_count(*col) != array.star_count(*reference_col),
            (axiom @ (Axiom::C2a | Axiom::C2b), Witness::Pair { cells, .. }) => {
                let [(j1, k1), (j2, k2)] = *cells;
                if (j1, k1) == (j2, k2) {
                    return false;
                }
                let (a, b) = (array.get(j1, k1), array.get(j2, k2));
                if a.is_star() || a != b {
                    return false;
                }
                let collinear = j1 == j2 || k1 == k2;
                match axiom {
                    Axiom::C2a => collinear,
                    _ => {
                        !collinear && !(array.get(j1, k2).is_star() && array.get(j2, k1).is_star())
                    }
                }
            }
            (Axiom::C3, Witness::Covering { cells, .. }) => {
                let Some(&(j0, k0)) = cells.first() else {
                    return false;
                };
                let first = array.get(j0, k0);
                !first.is_star()
                    && cells.iter().all(|&(j, k)| array.get(j, k) == first)
                    && RelaySet::intersect_all(cells.iter().map(|&(_, k)| array.col_label(k)))
                        .is_some_and(RelaySet::is_empty)
            }
            _ => false,
        }
    }

    /// One-line machine-readable form, e.g.
    /// `AXIOM=C2b FAIL rows=(2,3) cols=(1-2-3,1-3-4)` (rows 1-based).
    pub fn machine_line(&self) -> String {
        match &self.witness {
            Witness::StarCount {
                label,
                stars,
                reference_stars,
                ..
            } => format!(
                "AXIOM={} FAIL col={label} stars={stars} expected={reference_stars}",
                self.axiom
            ),
            Witness::Pair {
                symbol,
                cells,
                labels,
            } => format!(
                "AXIOM={} FAIL symbol={symbol} rows=({},{}) cols=({},{})",
                self.axiom,
                cells[0].0 + 1,
                cells[1].0 + 1,
                labels[0],
                labels[1]
            ),
            Witness::Covering { symbol, labels, .. } => format!(
                "AXIOM={} FAIL symbol={symbol} cols=({})",
                self.axiom,
                labels.iter().join(",")
            ),
        }
    }
}

/// Result of the C1 check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarProfile {
    pub per_column: Vec<usize>,
    /// The common star count, when all columns agree.
    pub z: Option<usize>,
    pub violations: Vec<Violation>,
}

impl StarProfile {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_c1<S>(array: &PdaArray<S>) -> StarProfile {
    let per_column: Vec<usize> = (0..array.k()).map(|k| array.star_count(k)).collect();
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &per_column {
        *freq.entry(c).or_insert(0) += 1;
    }
    if freq.len() <= 1 {
        return StarProfile {
            z: Some(per_column.first().copied().unwrap_or(0)),
            per_column,
            violations: Vec::new(),
        };
    }
    // the most common count is the reference; ties go to the smaller count
    let (&mode, _) = freq
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .expect("nonempty");
    let reference_col = per_column
        .iter()
        .position(|&c| c == mode)
        .expect("mode occurs");
    let violations = per_column
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c != mode)
        .map(|(col, &stars)| Violation {
            axiom: Axiom::C1,
            witness: Witness::StarCount {
                col,
                label: array.col_label(col),
                stars,
                reference_col,
                reference_stars: mode,
            },
        })
        .collect();
    StarProfile {
        per_column,
        z: None,
        violations,
    }
}

pub fn check_c2<S: Clone + Eq + Hash + Display>(array: &PdaArray<S>) -> Vec<Violation> {
    check_c2_indexed(array, &array.symbol_index())
}

/// C2 over same-symbol cell pairs, grouped through the symbol index.
pub fn check_c2_indexed<S: Display>(array: &PdaArray<S>, index: &SymbolIndex<S>) -> Vec<Violation> {
    let mut out = Vec::new();
    for info in index.iter() {
        for (a, b) in info.occurrences.iter().tuple_combinations() {
            let (&(j1, k1), &(j2, k2)) = (a, b);
            let axiom = if j1 == j2 || k1 == k2 {
                Axiom::C2a
            } else if !(array.get(j1, k2).is_star() && array.get(j2, k1).is_star()) {
                Axiom::C2b
            } else {
                continue;
            };
            out.push(Violation {
                axiom,
                witness: Witness::Pair {
                    symbol: info.symbol.to_string(),
                    cells: [(j1, k1), (j2, k2)],
                    labels: [array.col_label(k1), array.col_label(k2)],
                },
            });
        }
    }
    out
}

pub fn check_c3<S: Clone + Eq + Hash + Display>(array: &PdaArray<S>) -> Vec<Violation> {
    check_c3_indexed(array, &array.symbol_index())
}

pub fn check_c3_indexed<S: Display>(array: &PdaArray<S>, index: &SymbolIndex<S>) -> Vec<Violation> {
    index
        .empty_intersections()
        .map(|info| {
            let cells: Vec<(usize, usize)> = info
                .occurrences
                .iter()
                .copied()
                .sorted_by_key(|&(j, k)| (k, j))
                .dedup_by(|a, b| a.1 == b.1)
                .collect();
            let cols: Vec<usize> = cells.iter().map(|c| c.1).collect();
            Violation {
                axiom: Axiom::C3,
                witness: Witness::Covering {
                    symbol: info.symbol.to_string(),
                    cells,
                    labels: cols.iter().map(|&k| array.col_label(k)).collect(),
                    cols,
                },
            }
        })
        .collect()
}

/// Aggregated outcome of all axiom checks on one array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub require_cpda: bool,
    pub is_pda: bool,
    pub is_cpda: bool,
    pub k: usize,
    pub f: usize,
    pub r: usize,
    /// `None` when columns disagree (C1 fails).
    pub z: Option<usize>,
    pub s: usize,
    pub w_histogram: BTreeMap<usize, usize>,
    /// Symbols whose relay intersection is a whole column label (`w_s = r`).
    pub full_width_symbols: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// Valid under the requested definition.
    pub fn passed(&self) -> bool {
        if self.require_cpda {
            self.is_cpda
        } else {
            self.is_pda
        }
    }

    pub fn params(&self) -> (usize, usize, Option<usize>, usize) {
        (self.k, self.f, self.z, self.s)
    }

    pub fn count(&self, axiom: Axiom) -> usize {
        self.violations.iter().filter(|v| v.axiom == axiom).count()
    }

    fn z_text(&self) -> String {
        self.z
            .map_or_else(|| "non-uniform".to_string(), |z| z.to_string())
    }

    fn histogram_text(&self) -> String {
        format!(
            "{{{}}}",
            self.w_histogram
                .iter()
                .map(|(w, n)| format!("{w}:{n}"))
                .join(", ")
        )
    }

    /// e.g. `CPDA (10,5,2,10), w: {2:10}`.
    pub fn summary(&self) -> String {
        let kind = if self.is_cpda {
            "CPDA"
        } else if self.is_pda {
            "PDA"
        } else {
            "INVALID"
        };
        format!(
            "{kind} ({},{},{},{}), w: {}",
            self.k,
            self.f,
            self.z_text(),
            self.s,
            self.histogram_text()
        )
    }

    pub fn machine_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("K={} F={} Z={} S={}", self.k, self.f, self.z_text(), self.s),
            format!("IS_PDA={} IS_CPDA={}", self.is_pda, self.is_cpda),
        ];
        for axiom in [Axiom::C1, Axiom::C2a, Axiom::C2b, Axiom::C3] {
            if self.count(axiom) == 0 {
                lines.push(format!("AXIOM={axiom} PASS"));
            }
        }
        lines.extend(self.violations.iter().map(Violation::machine_line));
        lines
    }
}

impl Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary())?;
        writeln!(
            f,
            "K = {}, F = {}, Z = {}, S = {}",
            self.k,
            self.f,
            self.z_text(),
            self.s
        )?;
        if self.full_width_symbols > 0 {
            writeln!(
                f,
                "note: {} symbol(s) have w_s = r = {} (single covering label)",
                self.full_width_symbols, self.r
            )?;
        }
        for line in self.machine_lines().iter().skip(2) {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Runs C1, C2 and C3 and measures `(K, F, Z, S)`.
pub fn validate<S: Clone + Eq + Hash + Display>(
    array: &PdaArray<S>,
    require_cpda: bool,
) -> ValidationReport {
    let index = array.symbol_index();
    let stars = check_c1(array);
    let c2 = check_c2_indexed(array, &index);
    let c3 = check_c3_indexed(array, &index);
    let is_pda = stars.passed() && c2.is_empty();
    let is_cpda = is_pda && c3.is_empty();

    let mut w_histogram = index.width_histogram();
    w_histogram.remove(&0);
    let full_width_symbols = index.iter().filter(|s| s.width() == array.r()).count();

    let mut violations = stars.violations;
    violations.extend(c2);
    violations.extend(c3);

    ValidationReport {
        require_cpda,
        is_pda,
        is_cpda,
        k: array.k(),
        f: array.f(),
        r: array.r(),
        z: stars.z,
        s: index.len(),
        w_histogram,
        full_width_symbols,
        violations,
    }
}

/// Count of cells per symbol, handy for multiplicity checks.
pub fn symbol_multiplicities<S: Clone + Eq + Hash>(array: &PdaArray<S>) -> HashMap<S, usize> {
    let mut out = HashMap::new();
    for (_, _, e) in array.cells() {
        if let Entry::Symbol(s) = e {
            *out.entry(s.clone()).or_insert(0) += 1;
        }
    }
    out
}
