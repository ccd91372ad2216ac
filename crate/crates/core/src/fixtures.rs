//! Hardcoded reference arrays.

use itertools::Itertools;
use rand::Rng;

use crate::combinat::enumerate_subsets;
use crate::model::{Entry, PdaArray};

/// The `(10,5,2,10)` CPDA for `H = 5, r = 3`, with its published symbol numbering.
///
/// Columns are the 3-subsets of `[5]` in lexicographic order; `0` stands for `*`.
pub fn example1() -> PdaArray<u32> {
    const CELLS: [[u32; 10]; 5] = [
        [5, 6, 7, 8, 9, 10, 0, 0, 0, 0],
        [2, 3, 4, 0, 0, 0, 8, 9, 10, 0],
        [1, 0, 0, 3, 4, 0, 6, 7, 0, 10],
        [0, 1, 0, 2, 0, 4, 5, 0, 7, 9],
        [0, 0, 1, 0, 2, 3, 0, 5, 6, 8],
    ];
    let rows = CELLS
        .iter()
        .map(|row| {
            row.iter()
                .map(|&v| {
                    if v == 0 {
                        Entry::Star
                    } else {
                        Entry::Symbol(v)
                    }
                })
                .collect()
        })
        .collect();
    PdaArray::new(5, 3, enumerate_subsets(5, 3).expect("valid sizes"), rows)
        .expect("well-formed fixture")
}

/// One changed cell, 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellMutation {
    pub row: usize,
    pub col: usize,
    pub before: Entry<u32>,
    pub after: Entry<u32>,
}

/// Changes one random cell: a star becomes an existing symbol, a symbol
/// becomes a star or a different existing symbol.
pub fn mutate_cell<R: Rng>(array: &PdaArray<u32>, rng: &mut R) -> (PdaArray<u32>, CellMutation) {
    let symbols: Vec<u32> = array
        .symbol_index()
        .iter()
        .map(|i| i.symbol)
        .sorted()
        .collect();
    let row = rng.random_range(0..array.f());
    let col = rng.random_range(0..array.k());
    let before = *array.get(row, col);
    let after = match before {
        Entry::Star => Entry::Symbol(symbols[rng.random_range(0..symbols.len())]),
        Entry::Symbol(s) => {
            let others: Vec<u32> = symbols.iter().copied().filter(|&x| x != s).collect();
            if others.is_empty() || rng.random_bool(0.5) {
                Entry::Star
            } else {
                Entry::Symbol(others[rng.random_range(0..others.len())])
            }
        }
    };
    let mut mutated = array.clone();
    mutated.set(row, col, after);
    (
        mutated,
        CellMutation {
            row,
            col,
            before,
            after,
        },
    )
}
