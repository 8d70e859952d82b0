//! Fixed workloads shared by the criterion benches.

use gauss_cumulants::{CumulantQuery, Index};

/// Named cumulant queries, from cheap to the heaviest twelve-index cases.
pub fn workloads() -> Vec<(&'static str, CumulantQuery)> {
    let q = |groups: &[&[Index]]| CumulantQuery::from_slices(groups).expect("valid fixture");
    vec![
        ("doublets_x3", q(&[&[1, 2], &[3, 4], &[5, 6]])),
        ("doublets_x4", q(&[&[1, 2], &[3, 4], &[5, 6], &[7, 8]])),
        ("triplets_x2", q(&[&[1, 2, 3], &[4, 5, 6]])),
        (
            "mixed_5_groups_repeats",
            q(&[&[3], &[1, 3], &[1, 3], &[1, 2, 3], &[1, 2, 3, 3]]),
        ),
        (
            "quadruplets_x3",
            q(&[&[1, 2, 3, 4], &[5, 6, 7, 8], &[9, 10, 11, 12]]),
        ),
        (
            "triplets_x4",
            q(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9], &[10, 11, 12]]),
        ),
        (
            "mixed_12_distinct",
            q(&[&[1], &[2], &[3, 4, 5], &[6, 7, 8], &[9, 10, 11, 12]]),
        ),
    ]
}
