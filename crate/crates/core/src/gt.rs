//! Free-group words and the Grothendieck–Teichmüller relations (I) and (II)
//! for integral parameters.
//!
//! `λ` ranges over odd integers, and membership of `f` in the derived
//! subgroup is approximated by zero exponent sums in both letters. Relations
//! (III) and (IV) live in larger mapping class groups and are refused.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::profinite::FiniteGroup;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GtError {
    #[error("λ = {0} is even, so m = (λ−1)/2 is not an integer")]
    LambdaEven(i64),
    #[error("f has exponent sums ({0}, {1}); both must vanish")]
    NotInCommutator(i64, i64),
    #[error("cannot parse word: {0}")]
    Parse(String),
    #[error("the images do not generate the group (they generate {generated} of {order} elements)")]
    NotGenerated { generated: usize, order: usize },
    #[error("relation ({0}) is not supported")]
    UnsupportedRelation(String),
}

/// A letter `gen^{±1}`; generator 0 is `x`, 1 is `y`, 2 is `z`, and so on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: u8,
    pub inverse: bool,
}

impl Letter {
    pub fn inv(self) -> Self {
        Self {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedWord(Vec<Letter>);

pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> ReducedWord {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    ReducedWord(out)
}

impl ReducedWord {
    pub fn empty() -> Self {
        Self(vec![])
    }

    pub fn generator(gen: u8) -> Self {
        Self(vec![Letter { gen, inverse: false }])
    }

    pub fn x() -> Self {
        Self::generator(0)
    }

    pub fn y() -> Self {
        Self::generator(1)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Self) -> Self {
        reduce(self.0.iter().chain(&other.0).copied())
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        (0..k.unsigned_abs()).fold(Self::empty(), |acc, _| acc.mul(&base))
    }

    /// `a b a⁻¹ b⁻¹`.
    pub fn commutator(a: &Self, b: &Self) -> Self {
        a.mul(b).mul(&a.inverse()).mul(&b.inverse())
    }

    pub fn product<'a>(words: impl IntoIterator<Item = &'a Self>) -> Self {
        words.into_iter().fold(Self::empty(), |acc, w| acc.mul(w))
    }

    pub fn exponent_sum(&self, gen: u8) -> i64 {
        self.0
            .iter()
            .filter(|l| l.gen == gen)
            .map(|l| if l.inverse { -1 } else { 1 })
            .sum()
    }

    /// Parses a word like `"x y X Y"`: capitals are inverses, whitespace is
    /// ignored. `x`, `y`, `z` are generators 0, 1, 2 and `a`, `b`, … follow.
    pub fn parse(s: &str) -> Result<Self, GtError> {
        let mut letters = Vec::new();
        for ch in s.chars().filter(|c| !c.is_whitespace()) {
            if !ch.is_ascii_alphabetic() {
                return Err(GtError::Parse(format!("unexpected character `{ch}`")));
            }
            let lower = ch.to_ascii_lowercase() as u8;
            let gen = (lower - b'a' + 26 - (b'x' - b'a')) % 26;
            letters.push(Letter {
                gen,
                inverse: ch.is_ascii_uppercase(),
            });
        }
        Ok(reduce(letters))
    }

    /// Evaluates the word in a group, sending generator `k` to `images[k]`.
    pub fn eval(&self, g: &FiniteGroup, images: &[usize]) -> usize {
        self.0.iter().fold(g.identity(), |acc, l| {
            let a = images[l.gen as usize];
            g.mul(acc, if l.inverse { g.inv(a) } else { a })
        })
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self
            .0
            .iter()
            .map(|l| {
                let c = (b'a' + (l.gen + (b'x' - b'a')) % 26) as char;
                if l.inverse {
                    c.to_ascii_uppercase().to_string()
                } else {
                    c.to_string()
                }
            })
            .collect();
        f.write_str(&s.join(" "))
    }
}

impl Serialize for ReducedWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Replaces generator `k` by `images[k]` and reduces.
pub fn substitute_all(f: &ReducedWord, images: &[ReducedWord]) -> ReducedWord {
    let mut out = ReducedWord::empty();
    for l in f.letters() {
        let w = &images[l.gen as usize];
        out = out.mul(&if l.inverse { w.inverse() } else { w.clone() });
    }
    out
}

/// `f(a, b)`: `x ↦ a`, `y ↦ b`.
pub fn substitute(f: &ReducedWord, a: &ReducedWord, b: &ReducedWord) -> ReducedWord {
    substitute_all(f, &[a.clone(), b.clone()])
}

/// `z = (xy)⁻¹`, so that `xyz = 1`.
pub fn z() -> ReducedWord {
    ReducedWord::x().mul(&ReducedWord::y()).inverse()
}

/// The word `f(x,y)·f(y,x)` whose triviality is relation (I).
pub fn relation_i_word(f: &ReducedWord) -> ReducedWord {
    let (x, y) = (ReducedWord::x(), ReducedWord::y());
    substitute(f, &x, &y).mul(&substitute(f, &y, &x))
}

pub fn check_relation_i(f: &ReducedWord) -> bool {
    relation_i_word(f).is_empty()
}

/// The word `f(x,y)·xᵐ·f(z,x)·zᵐ·f(y,z)·yᵐ` with `m = (λ−1)/2`.
pub fn relation_ii_word(lambda: i64, f: &ReducedWord) -> Result<ReducedWord, GtError> {
    if lambda.rem_euclid(2) == 0 {
        return Err(GtError::LambdaEven(lambda));
    }
    let m = (lambda - 1) / 2;
    let (x, y, z) = (ReducedWord::x(), ReducedWord::y(), z());
    Ok(ReducedWord::product([
        &substitute(f, &x, &y),
        &x.pow(m),
        &substitute(f, &z, &x),
        &z.pow(m),
        &substitute(f, &y, &z),
        &y.pow(m),
    ]))
}

pub fn check_relation_ii(lambda: i64, f: &ReducedWord) -> Result<bool, GtError> {
    Ok(relation_ii_word(lambda, f)?.is_empty())
}

/// Relations by their roman numeral; only (I) and (II) are checkable here.
pub fn check_relation(relation: &str, lambda: i64, f: &ReducedWord) -> Result<bool, GtError> {
    match relation {
        "I" => Ok(check_relation_i(f)),
        "II" => check_relation_ii(lambda, f),
        other => Err(GtError::UnsupportedRelation(other.to_string())),
    }
}

/// `(λ, f)` with `λ` odd and `f` of zero exponent sum in `x` and `y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GtPair {
    pub lambda: i64,
    pub f: ReducedWord,
}

impl GtPair {
    pub fn new(lambda: i64, f: ReducedWord) -> Result<Self, GtError> {
        if lambda.rem_euclid(2) == 0 {
            return Err(GtError::LambdaEven(lambda));
        }
        let (sx, sy) = (f.exponent_sum(0), f.exponent_sum(1));
        if sx != 0 || sy != 0 {
            return Err(GtError::NotInCommutator(sx, sy));
        }
        Ok(Self { lambda, f })
    }

    pub fn identity() -> Self {
        Self {
            lambda: 1,
            f: ReducedWord::empty(),
        }
    }

    /// Images of `x` and `y` under `x ↦ x^λ`, `y ↦ f⁻¹ y^λ f`.
    pub fn endo_images(&self) -> (ReducedWord, ReducedWord) {
        let (x, y) = (ReducedWord::x(), ReducedWord::y());
        let f = &self.f;
        (x.pow(self.lambda), ReducedWord::product([&f.inverse(), &y.pow(self.lambda), f]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientEndo {
    /// Image of each group element, when the assignment extends to a
    /// homomorphism.
    pub map: Option<Vec<usize>>,
    pub image_x: usize,
    pub image_y: usize,
    /// The assignment on generators extends to an endomorphism.
    pub well_defined: bool,
    /// Order of the subgroup generated by the two images.
    pub image_order: usize,
    pub is_bijective: bool,
}

/// Evaluates `x ↦ a^λ`, `y ↦ f(a,b)⁻¹ b^λ f(a,b)` in a finite quotient
/// `G = ⟨a, b⟩` and reports whether this defines a bijective endomorphism.
pub fn induced_endo_on_quotient(
    pair: &GtPair,
    g: &FiniteGroup,
    a: usize,
    b: usize,
) -> Result<QuotientEndo, GtError> {
    let generated = g.generated(&[a, b]);
    if generated.len() != g.order() {
        return Err(GtError::NotGenerated {
            generated: generated.len(),
            order: g.order(),
        });
    }
    let (wx, wy) = pair.endo_images();
    let (ix, iy) = (wx.eval(g, &[a, b]), wy.eval(g, &[a, b]));
    let map = extend_to_hom(g, &[a, b], &[ix, iy]);
    let image_order = g.generated(&[ix, iy]).len();
    Ok(QuotientEndo {
        well_defined: map.is_some(),
        is_bijective: map.is_some() && image_order == g.order(),
        map,
        image_x: ix,
        image_y: iy,
        image_order,
    })
}

/// The homomorphism `G → G` sending `gens[k] ↦ images[k]`, if one exists.
/// `gens` must generate `G`.
fn extend_to_hom(g: &FiniteGroup, gens: &[usize], images: &[usize]) -> Option<Vec<usize>> {
    let e = g.identity();
    let mut map: HashMap<usize, usize> = HashMap::from([(e, e)]);
    let mut queue = VecDeque::from([e]);
    while let Some(p) = queue.pop_front() {
        for (&s, &t) in gens.iter().zip(images) {
            let (q, fq) = (g.mul(p, s), g.mul(map[&p], t));
            match map.get(&q) {
                Some(&old) if old != fq => return None,
                Some(_) => {}
                None => {
                    map.insert(q, fq);
                    queue.push_back(q);
                }
            }
        }
    }
    let out: Vec<usize> = (0..g.order()).map(|k| map[&k]).collect();
    let hom = (0..g.order()).all(|p| (0..g.order()).all(|q| out[g.mul(p, q)] == g.mul(out[p], out[q])));
    hom.then_some(out)
}
