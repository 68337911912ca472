//! Published correction-term lists for 8_13, 8_17 and 10_158.

use dconcord_core::goeritz::{d_table_from_goeritz, extend_twisted, GoeritzForm};
use dconcord_core::{d_table_lens, IntMatrix, LensSpace, Orientation, Rational};

fn fractions(list: &[(i64, i64)]) -> Vec<Rational> {
    let mut v: Vec<Rational> = list.iter().map(|&(n, d)| Rational::new(n, d)).collect();
    v.sort();
    v
}

const D_8_13: [(i64, i64); 29] = [
    (-2, 29), (-18, 29), (8, 29), (18, 29), (12, 29), (-10, 29), (10, 29), (14, 29), (2, 29),
    (-26, 29), (-12, 29), (-14, 29), (-32, 29), (-8, 29), (0, 1), (-8, 29), (-32, 29), (-14, 29),
    (-12, 29), (-26, 29), (2, 29), (14, 29), (10, 29), (-10, 29), (12, 29), (18, 29), (8, 29),
    (-18, 29), (-2, 29),
];

const D_8_17: [(i64, i64); 37] = [
    (-20, 37), (-32, 37), (18, 37), (-18, 37), (8, 37), (22, 37), (24, 37), (14, 37), (-8, 37),
    (32, 37), (-14, 37), (2, 37), (6, 37), (-2, 37), (-22, 37), (20, 37), (-24, 37), (-6, 37),
    (0, 1), (-6, 37), (-24, 37), (20, 37), (-22, 37), (-2, 37), (6, 37), (2, 37), (-14, 37),
    (32, 37), (-8, 37), (14, 37), (24, 37), (22, 37), (8, 37), (-18, 37), (18, 37), (-32, 37),
    (-20, 37),
];

const D_10_158: [(i64, i64); 45] = [
    (-2, 45), (-2, 5), (8, 9), (-8, 45), (2, 5), (28, 45), (22, 45), (0, 1), (-38, 45), (-2, 45),
    (2, 5), (22, 45), (2, 9), (-2, 5), (28, 45), (-32, 45), (-2, 5), (-4, 9), (-38, 45), (2, 5),
    (-32, 45), (-8, 45), (0, 1), (-8, 45), (-32, 45), (2, 5), (-38, 45), (-4, 9), (-2, 5),
    (-32, 45), (28, 45), (-2, 5), (2, 9), (22, 45), (2, 5), (-2, 45), (-38, 45), (0, 1), (22, 45),
    (28, 45), (2, 5), (-8, 45), (8, 9), (-2, 5), (-2, 45),
];

#[test]
fn lens_8_13() {
    let t = d_table_lens(&LensSpace::new(29, 11, Orientation::Positive).unwrap()).unwrap();
    assert_eq!(t.multiset(), fractions(&D_8_13));
    assert_eq!(t.values()[0], Rational::zero());
}

#[test]
fn goeritz_8_17() {
    let g = IntMatrix::from_rows(&[
        vec![-3i64, 1, 0, 1],
        vec![1, -3, 1, 1],
        vec![0, 1, -2, 0],
        vec![1, 1, 0, -4],
    ])
    .unwrap();
    let t = d_table_from_goeritz(&GoeritzForm::new(g).unwrap()).unwrap();
    assert_eq!(t.multiset(), fractions(&D_8_17));
    assert_eq!(t.values()[0], Rational::zero());
}

#[test]
fn twisted_10_158() {
    let base = IntMatrix::from_rows(&[vec![-4i64, 1, 2], vec![1, -4, 2], vec![2, 2, -4]]).unwrap();
    let g = extend_twisted(&base, 3).unwrap();
    let t = d_table_from_goeritz(&GoeritzForm::new(g).unwrap()).unwrap();
    assert_eq!(t.multiset(), fractions(&D_10_158));
}
