//! Exact affine isometries `x ↦ Xx + t` with `X = diag(±1)` and `t ∈ ½ℤⁿ`.
//!
//! Translations are stored doubled so every value is an integer. The
//! realization of a generator matrix gives an independent way to compute
//! products, torsion and relations without the `⋆` calculus.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::klein::{DEntry, Row};
use crate::matrix::{Element, GenMatrix};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineIsometry<T> {
    pub signs: Vec<i8>,
    /// Twice the translation part.
    pub trans2: Vec<T>,
}

impl<T: Scalar> AffineIsometry<T> {
    pub fn identity(n: usize) -> Self {
        AffineIsometry {
            signs: vec![1; n],
            trans2: vec![T::zero(); n],
        }
    }

    /// Pure translation by `trans2 / 2`.
    pub fn translation(trans2: Vec<T>) -> Self {
        AffineIsometry {
            signs: vec![1; trans2.len()],
            trans2,
        }
    }

    /// The lattice generator `e_i` in dimension `n`.
    pub fn lattice_generator(n: usize, i: usize) -> Self {
        let mut t = vec![T::zero(); n];
        t[i] = T::two();
        Self::translation(t)
    }

    /// Isometry read off a characteristic row via the entry table.
    pub fn from_row(row: &Row) -> Self {
        AffineIsometry {
            signs: row.entries().map(DEntry::sign).collect(),
            trans2: row
                .entries()
                .map(|e| if e.has_half() { T::one() } else { T::zero() })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    /// `self ∘ other`: signs multiply and `t = X_self t_other + t_self`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::LengthMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let signs = self
            .signs
            .iter()
            .zip(&other.signs)
            .map(|(a, b)| a * b)
            .collect();
        let trans2 = self
            .signs
            .iter()
            .zip(other.trans2.iter().zip(&self.trans2))
            .map(|(&s, (tb, ta))| apply_sign(s, tb.clone()) + ta.clone())
            .collect();
        Ok(AffineIsometry { signs, trans2 })
    }

    pub fn inverse(&self) -> Self {
        AffineIsometry {
            signs: self.signs.clone(),
            trans2: self
                .signs
                .iter()
                .zip(&self.trans2)
                .map(|(&s, t)| -apply_sign(s, t.clone()))
                .collect(),
        }
    }

    pub fn square(&self) -> Self {
        self.compose(self).expect("same dimension")
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut acc = Self::identity(self.dim());
        for _ in 0..e.unsigned_abs() {
            acc = acc.compose(&base).expect("same dimension");
        }
        acc
    }

    pub fn is_translation(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }

    pub fn is_identity(&self) -> bool {
        self.is_translation() && self.trans2.iter().all(|t| t.is_zero())
    }

    /// Whether `self` differs from `other` by a lattice translation `ℤⁿ`.
    pub fn congruent(&self, other: &Self) -> bool {
        self.signs == other.signs
            && self
                .trans2
                .iter()
                .zip(&other.trans2)
                .all(|(a, b)| (a.clone() - b.clone()).is_even())
    }

    /// Entry of coordinate `j` modulo the lattice.
    pub fn entry(&self, j: usize) -> DEntry {
        DEntry::from_parts(self.signs[j] < 0, !self.trans2[j].is_even())
    }

    pub fn row(&self) -> Row {
        Row::from_entries(&(0..self.dim()).map(|j| self.entry(j)).collect::<Vec<_>>())
    }

    /// Coordinates fixed by the linear part.
    pub fn fixed_coordinates(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&j| self.signs[j] == 1).collect()
    }
}

fn apply_sign<T: Scalar>(s: i8, t: T) -> T {
    if s < 0 {
        -t
    } else {
        t
    }
}

impl<T: Scalar> fmt::Display for AffineIsometry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let signs: Vec<String> = self.signs.iter().map(|s| s.to_string()).collect();
        let trans: Vec<String> = self.trans2.iter().map(half).collect();
        write!(f, "diag({}) + ({})", signs.join(","), trans.join(", "))
    }
}

fn half<T: Scalar>(t: &T) -> String {
    if t.is_even() {
        (t.clone() / T::two()).to_string()
    } else {
        format!("{t}/2")
    }
}

/// Generators of the group defined by a matrix, as isometries of `ℝⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupRealization<T> {
    pub generators: Vec<AffineIsometry<T>>,
    pub lattice_rank: usize,
}

impl<T: Scalar> GroupRealization<T> {
    pub fn k(&self) -> usize {
        self.generators.len()
    }

    /// Representative of holonomy element `v`: the product of its generators
    /// in increasing index order.
    pub fn element(&self, v: Element) -> AffineIsometry<T> {
        let mut acc = AffineIsometry::identity(self.lattice_rank);
        for (i, g) in self.generators.iter().enumerate() {
            if v >> i & 1 == 1 {
                acc = acc.compose(g).expect("same dimension");
            }
        }
        acc
    }
}

pub fn realize<T: Scalar>(a: &GenMatrix) -> GroupRealization<T> {
    GroupRealization {
        generators: a.rows().iter().map(AffineIsometry::from_row).collect(),
        lattice_rank: a.n(),
    }
}

pub fn compose<T: Scalar>(
    a: &AffineIsometry<T>,
    b: &AffineIsometry<T>,
) -> Result<AffineIsometry<T>> {
    a.compose(b)
}

/// Searches the coset representatives of all nonzero holonomy elements for
/// one with a finite-order lift. `(X, t)` has one iff `t` is integral on
/// every coordinate with `X_jj = 1`; the returned lift has those coordinates
/// translated to zero, so it squares to the identity.
pub fn torsion_oracle<T: Scalar>(a: &GenMatrix) -> Option<(Element, AffineIsometry<T>)> {
    let real = realize::<T>(a);
    (1..(1u32 << a.k())).find_map(|v| {
        let g = real.element(v);
        let finite = g
            .signs
            .iter()
            .zip(&g.trans2)
            .all(|(&s, t)| s < 0 || t.is_even());
        finite.then(|| {
            let trans2 = g
                .signs
                .iter()
                .zip(g.trans2)
                .map(|(&s, t)| if s > 0 { T::zero() } else { t })
                .collect();
            (
                v,
                AffineIsometry {
                    signs: g.signs,
                    trans2,
                },
            )
        })
    })
}

/// A word `x^e1 y^e2 ...` over named generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word(pub Vec<(String, i64)>);

impl Word {
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|(s, e)| (s.clone(), -e)).collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(s, e)| {
                if *e == 1 {
                    s.clone()
                } else {
                    format!("{s}^{e}")
                }
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

const SUPERSCRIPTS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

impl FromStr for Word {
    type Err = Error;

    /// Factors are whitespace separated: `x`, `x^2`, `x^-1`, `x^{-1}` or `x⁻¹`.
    fn from_str(s: &str) -> Result<Word> {
        let mut factors = Vec::new();
        for token in s.split_whitespace() {
            let split = token
                .find(|c: char| c == '^' || c == '⁻' || SUPERSCRIPTS.contains(&c))
                .unwrap_or(token.len());
            let (name, exp) = token.split_at(split);
            if name.is_empty() {
                return Err(Error::WordSyntax(format!("missing symbol in {token:?}")));
            }
            let e = if exp.is_empty() {
                1
            } else if let Some(rest) = exp.strip_prefix('^') {
                let rest = rest
                    .strip_prefix('{')
                    .and_then(|r| r.strip_suffix('}'))
                    .unwrap_or(rest);
                rest.parse::<i64>()
                    .map_err(|_| Error::WordSyntax(format!("bad exponent in {token:?}")))?
            } else {
                let (neg, digits) = match exp.strip_prefix('⁻') {
                    Some(d) => (true, d),
                    None => (false, exp),
                };
                let mut value: i64 = 0;
                for c in digits.chars() {
                    let d = SUPERSCRIPTS
                        .iter()
                        .position(|&x| x == c)
                        .ok_or_else(|| Error::WordSyntax(format!("bad exponent in {token:?}")))?;
                    value = value * 10 + d as i64;
                }
                if digits.is_empty() {
                    return Err(Error::WordSyntax(format!("bad exponent in {token:?}")));
                }
                if neg {
                    -value
                } else {
                    value
                }
            };
            factors.push((name.to_string(), e));
        }
        Ok(Word(factors))
    }
}

/// Evaluates `word` left to right as a composition of isometries.
pub fn eval_word<T: Scalar>(
    gens: &BTreeMap<String, AffineIsometry<T>>,
    word: &Word,
) -> Result<AffineIsometry<T>> {
    let n = gens.values().next().map_or(0, AffineIsometry::dim);
    let mut acc = AffineIsometry::identity(n);
    for (sym, e) in &word.0 {
        let g = gens
            .get(sym)
            .ok_or_else(|| Error::UnknownSymbol(sym.clone()))?;
        acc = acc.compose(&g.pow(*e))?;
    }
    Ok(acc)
}

/// Rank over `ℚ` of the translation vectors of pure translations.
pub fn translation_rank<T: Scalar>(elems: &[AffineIsometry<T>]) -> Result<usize> {
    if let Some(index) = elems.iter().position(|g| !g.is_translation()) {
        return Err(Error::NotTranslation { index });
    }
    let mut rows: Vec<Vec<T>> = elems.iter().map(|g| g.trans2.clone()).collect();
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot) {
                *x = x.clone() * pivot[c].clone() - y.clone() * factor.clone();
            }
        }
        rank += 1;
    }
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::is_torsion_free;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    type Iso = AffineIsometry<i64>;

    fn m(rows: &[&[u8]]) -> GenMatrix {
        GenMatrix::from_codes(rows).unwrap()
    }

    fn entry_iso(code: u8) -> Iso {
        AffineIsometry::from_row(&Row::from_codes(&[code]).unwrap())
    }

    #[test]
    fn realize_examples() {
        let r = realize::<i64>(&m(&[&[2, 2, 1, 3], &[1, 0, 2, 2]]));
        assert_eq!(r.generators[0].signs, vec![-1, -1, 1, -1]);
        assert_eq!(r.generators[0].trans2, vec![0, 0, 1, 1]);

        let zero = realize::<i64>(&m(&[&[0, 0, 0]]));
        assert!(zero.generators[0].is_identity());

        let dp = realize::<i64>(&m(&[&[1, 3, 2], &[2, 1, 3]]));
        assert_eq!(dp.generators[0].signs, vec![1, -1, -1]);
        assert_eq!(dp.generators[0].trans2, vec![1, 1, 0]);
    }

    #[test]
    fn compose_examples() {
        let r = realize::<i64>(&m(&[&[2, 2, 1, 3], &[1, 0, 2, 2]]));
        let g = r.generators[0].compose(&r.generators[1]).unwrap();
        assert_eq!(g.signs, vec![-1, -1, -1, 1]);
        assert_eq!(g.trans2, vec![-1, 0, 1, 1]);
        assert_eq!(g.to_string(), "diag(-1,-1,-1,1) + (-1/2, 0, 1/2, 1/2)");

        let a = &r.generators[0];
        assert_eq!(a.compose(&Iso::identity(4)).unwrap(), *a);
        assert!(a.compose(&Iso::identity(3)).is_err());
    }

    #[test]
    fn star_table_matches_composition() {
        for a in DEntry::ALL {
            for b in DEntry::ALL {
                let g = entry_iso(a.code()).compose(&entry_iso(b.code())).unwrap();
                assert_eq!(g.entry(0), a.star(b), "{a:?} {b:?}");
            }
        }
        // (−1,0)∘(−1,½) = (1,½)
        assert_eq!(
            entry_iso(2).compose(&entry_iso(3)).unwrap().entry(0).code(),
            1
        );
    }

    #[test]
    fn torsion_oracle_examples() {
        let (v, g) = torsion_oracle::<i64>(&m(&[&[1, 2], &[2, 1]])).unwrap();
        assert_eq!(v, 0b11);
        assert_eq!(g.signs, vec![-1, -1]);
        assert!(g.square().is_identity());

        let min72 = m(&[&[0, 3, 2, 1, 2], &[2, 2, 1, 1, 1], &[1, 1, 0, 2, 2]]);
        assert!(torsion_oracle::<i64>(&min72).is_none());

        let (v, g) = torsion_oracle::<i64>(&m(&[&[1, 2, 1], &[2, 0, 2]])).unwrap();
        assert_eq!(v, 0b10);
        assert!(g.square().is_identity());
    }

    #[test]
    fn word_parsing() {
        let w: Word = "x^-1 y^2 x y^{2}".parse().unwrap();
        assert_eq!(
            w.0,
            vec![
                ("x".into(), -1),
                ("y".into(), 2),
                ("x".into(), 1),
                ("y".into(), 2)
            ]
        );
        let u: Word = "x⁻¹ y² x y²".parse().unwrap();
        assert_eq!(u, w);
        assert_eq!(w.to_string(), "x^-1 y^2 x y^2");
        assert!("^2".parse::<Word>().is_err());
        assert!("x^a".parse::<Word>().is_err());
        assert_eq!("".parse::<Word>().unwrap().0.len(), 0);
    }

    fn deltap_gens() -> BTreeMap<String, Iso> {
        let r = realize::<i64>(&m(&[&[1, 3, 2], &[2, 1, 3]]));
        BTreeMap::from([
            ("x".into(), r.generators[0].clone()),
            ("y".into(), r.generators[1].clone()),
        ])
    }

    #[test]
    fn eval_word_examples() {
        let gens = deltap_gens();
        assert!(eval_word(&gens, &"x x^-1".parse().unwrap())
            .unwrap()
            .is_identity());
        assert_eq!(gens["x"].square().trans2, vec![2, 0, 0]);
        assert_eq!(gens["y"].square().trans2, vec![0, 2, 0]);
        assert!(eval_word(&gens, &"x^-1 y^2 x y^2".parse().unwrap())
            .unwrap()
            .is_identity());
        assert!(eval_word(&gens, &"y^-1 x^2 y x^2".parse().unwrap())
            .unwrap()
            .is_identity());
        assert!(matches!(
            eval_word(&gens, &"z".parse().unwrap()),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn translation_rank_examples() {
        let gens = deltap_gens();
        let (a, b) = (&gens["x"], &gens["y"]);
        let ab = a.compose(b).unwrap();
        let squares = vec![a.square(), b.square(), ab.square()];
        assert_eq!(ab.square().trans2, vec![0, 0, -2]);
        assert_eq!(translation_rank(&squares).unwrap(), 3);
        assert_eq!(translation_rank::<i64>(&[]).unwrap(), 0);
        let e1 = Iso::lattice_generator(2, 0);
        assert_eq!(
            translation_rank(&[e1.clone(), e1.compose(&e1).unwrap()]).unwrap(),
            1
        );
        assert!(matches!(
            translation_rank(std::slice::from_ref(a)),
            Err(Error::NotTranslation { index: 0 })
        ));
    }

    #[test]
    fn bigint_scalar_agrees() {
        let a = m(&[&[2, 2, 1, 3], &[1, 0, 2, 2]]);
        let big = realize::<BigInt>(&a);
        let small = realize::<i64>(&a);
        let gb = big.element(0b11).pow(5);
        let gs = small.element(0b11).pow(5);
        assert_eq!(gb.signs, gs.signs);
        let as_big: Vec<BigInt> = gs.trans2.iter().map(|&t| BigInt::from(t)).collect();
        assert_eq!(gb.trans2, as_big);
        let t = vec![
            AffineIsometry::translation(vec![BigInt::from(3), BigInt::from(1)]),
            AffineIsometry::translation(vec![BigInt::from(6), BigInt::from(2)]),
        ];
        assert_eq!(translation_rank(&t).unwrap(), 1);
    }

    #[test]
    fn inverse_and_generator_squares() {
        let r = realize::<i64>(&m(&[&[0, 3, 2, 1, 2], &[2, 2, 1, 1, 1], &[1, 1, 0, 2, 2]]));
        for g in &r.generators {
            assert!(g.compose(&g.inverse()).unwrap().is_identity());
            assert!(g.square().is_translation());
        }
    }

    fn arb_iso(n: usize) -> impl Strategy<Value = Iso> {
        (
            proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n),
            proptest::collection::vec(-6i64..6, n),
        )
            .prop_map(|(signs, trans2)| AffineIsometry { signs, trans2 })
    }

    proptest! {
        #[test]
        fn compose_is_associative(a in arb_iso(4), b in arb_iso(4), c in arb_iso(4)) {
            let left = a.compose(&b).unwrap().compose(&c).unwrap();
            let right = a.compose(&b.compose(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn realized_products_match_star(
            rows in proptest::collection::vec(proptest::collection::vec(0u8..4, 5), 2..=3)
        ) {
            let a = GenMatrix::from_codes(&rows).unwrap();
            let c = a.closure();
            let r = realize::<i64>(&a);
            for (v, row) in c.iter() {
                prop_assert_eq!(&r.element(v).row(), row);
            }
            prop_assert_eq!(torsion_oracle::<i64>(&a).is_none(), is_torsion_free(&c).0);
        }
    }
}
