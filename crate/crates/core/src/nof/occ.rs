use std::collections::HashMap;

use crate::field::ceil_log2;
use crate::functions::TwoPartyFn;

/// Partition of the rows of `M(f)` into classes of identical rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowClasses {
    /// Class of each row, numbered by first occurrence.
    pub class_of: Vec<u64>,
    /// First row of each class.
    pub representatives: Vec<usize>,
}

impl RowClasses {
    pub fn count(&self) -> usize {
        self.representatives.len()
    }
}

pub fn row_classes(f: &TwoPartyFn) -> RowClasses {
    let mut seen: HashMap<&[bool], u64> = HashMap::new();
    let mut class_of = Vec::with_capacity(f.rows());
    let mut representatives = Vec::new();
    for z in 0..f.rows() {
        let next = representatives.len() as u64;
        let c = *seen.entry(f.row(z)).or_insert_with(|| {
            representatives.push(z);
            next
        });
        class_of.push(c);
    }
    RowClasses { class_of, representatives }
}

/// One-way deterministic complexity: `⌈log₂(#distinct rows)⌉`.
pub fn occ_two_party(f: &TwoPartyFn) -> u32 {
    ceil_log2(row_classes(f).count() as u64)
}
