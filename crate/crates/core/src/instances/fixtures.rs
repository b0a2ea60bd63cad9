//! Small instances with known behavior, addressable by name.

use crate::qubo::{QuboInstance, Rational};

fn int(v: i64) -> Rational {
    Rational::from_integer(v)
}

fn ints(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()
}

/// `Q = [[0, a], [a, 0]]`, `c = (0, 0)`.
pub fn ex1(alpha: i64) -> QuboInstance {
    QuboInstance::new(ints(&[&[0, alpha], &[alpha, 0]]), vec![int(0), int(0)]).expect("valid fixture")
}

pub fn ex2() -> QuboInstance {
    QuboInstance::from_integers(
        &[vec![0, 3, -6, -3], vec![3, 0, 6, 3], vec![-6, 6, 0, -6], vec![-3, 3, -6, 0]],
        &[-3, -6, 0, 3],
    )
    .expect("valid fixture")
}

pub fn ex3() -> QuboInstance {
    QuboInstance::from_integers(&[vec![0, 1, 1], vec![1, 0, 0], vec![1, 0, 0]], &[1, -5, -5]).expect("valid fixture")
}

pub fn ex6a() -> QuboInstance {
    QuboInstance::from_integers(&[vec![0, -2, 0], vec![-2, 0, -1], vec![0, -1, 0]], &[5, 5, 0]).expect("valid fixture")
}

pub fn ex6b() -> QuboInstance {
    QuboInstance::from_integers(&[vec![0, 6, 1], vec![6, 0, -7], vec![1, -7, 0]], &[-7, -2, -15])
        .expect("valid fixture")
}

/// Asymmetric `Q = [[0, 3a], [-a, 0]]`, `c = (-a, -a)`; research mode only.
pub fn ex7(alpha: i64) -> QuboInstance {
    QuboInstance::new_asymmetric(ints(&[&[0, 3 * alpha], &[-alpha, 0]]), vec![int(-alpha), int(-alpha)])
        .expect("valid fixture")
}

/// `Q = [[0, a/2], [a/2, 0]]`, `c = (-a, 1)`.
pub fn ex8(alpha: i64) -> QuboInstance {
    let h = Rational::new(alpha, 2);
    QuboInstance::new(vec![vec![int(0), h], vec![h, int(0)]], vec![int(-alpha), int(1)]).expect("valid fixture")
}

/// `Q = [[0, 1], [1, 0]]`, `c = (-2, 0)`.
pub fn hm() -> QuboInstance {
    QuboInstance::from_integers(&[vec![0, 1], vec![1, 0]], &[-2, 0]).expect("valid fixture")
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 8] = ["ex1", "ex2", "ex3", "ex6a", "ex6b", "ex7", "ex8", "hm"];

/// Looks up a fixture; parametrized ones use `alpha = 1`.
pub fn by_name(name: &str) -> Option<QuboInstance> {
    Some(match name.to_ascii_lowercase().as_str() {
        "ex1" => ex1(1),
        "ex2" => ex2(),
        "ex3" => ex3(),
        "ex6a" => ex6a(),
        "ex6b" => ex6b(),
        "ex7" => ex7(1),
        "ex8" => ex8(1),
        "hm" => hm(),
        _ => return None,
    })
}

/// The symmetric fixtures, labelled.
pub fn symmetric() -> Vec<(&'static str, QuboInstance)> {
    NAMES
        .iter()
        .filter(|&&n| n != "ex7")
        .map(|&n| (n, by_name(n).expect("listed")))
        .collect()
}
