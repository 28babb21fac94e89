//! Finite coloured modular operads, optionally graded by genus.
//!
//! Entries of a profile `(c₀,…,c_{n-1})` at genus `g` are numbered
//! `0..entry_count(g, profile)`. Positions are 0-based throughout.
//! `act(g, c, p, x)` lands in the profile `d` with `d[k] = c[p[k]]`, so
//! `act(act(x, p), q) = act(x, p∘q)` with `(p∘q)[k] = p[q[k]]`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Colour = usize;
pub type Elem = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperadError {
    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),
    #[error("operation undefined: {0}")]
    Undefined(String),
    #[error("invalid operad table: {0}")]
    InvalidTable(String),
    #[error("unknown operad `{0}`")]
    UnknownOperad(String),
}

pub trait ModularOperad: Send + Sync {
    fn name(&self) -> String;
    fn colour_count(&self) -> usize;
    fn colour_name(&self, c: Colour) -> String;
    fn dagger(&self, c: Colour) -> Colour;
    fn max_arity(&self) -> usize;
    /// `None` for ungraded operads, where every entry has genus 0.
    fn max_genus(&self) -> Option<u32>;
    fn entry_count(&self, genus: u32, profile: &[Colour]) -> usize;
    fn elem_name(&self, genus: u32, profile: &[Colour], x: Elem) -> String;
    fn act(&self, genus: u32, profile: &[Colour], perm: &[usize], x: Elem) -> Elem;
    /// `id_c ∈ P(c†, c)`.
    fn unit(&self, c: Colour) -> Elem;
    /// `x ∘_{i,j} y`, landing in `c∖cᵢ ⧺ d∖dⱼ` at genus `g₁+g₂`.
    #[allow(clippy::too_many_arguments)]
    fn compose(
        &self,
        g1: u32,
        c: &[Colour],
        i: usize,
        x: Elem,
        g2: u32,
        d: &[Colour],
        j: usize,
        y: Elem,
    ) -> Option<Elem>;
    /// `ξ_{i,j}(x)` for `i < j`, landing in `c∖{cᵢ,cⱼ}` at genus `g+1`.
    fn contract(&self, g: u32, c: &[Colour], i: usize, j: usize, x: Elem) -> Option<Elem>;
    fn has_contractions(&self) -> bool {
        true
    }

    fn graded(&self) -> bool {
        self.max_genus().is_some()
    }
    fn comp_genus(&self, g1: u32, g2: u32) -> u32 {
        if self.graded() {
            g1 + g2
        } else {
            0
        }
    }
    fn contract_genus(&self, g: u32) -> u32 {
        if self.graded() {
            g + 1
        } else {
            0
        }
    }
    fn genus_range(&self) -> std::ops::RangeInclusive<u32> {
        0..=self.max_genus().unwrap_or(0)
    }
}

pub type OperadRef = Arc<dyn ModularOperad>;

pub(crate) fn remove_at(c: &[Colour], i: usize) -> Vec<Colour> {
    let mut v = c.to_vec();
    v.remove(i);
    v
}

pub(crate) fn comp_profile(c: &[Colour], i: usize, d: &[Colour], j: usize) -> Vec<Colour> {
    let mut v = remove_at(c, i);
    v.extend(remove_at(d, j));
    v
}

pub(crate) fn contract_profile(c: &[Colour], i: usize, j: usize) -> Vec<Colour> {
    c.iter()
        .enumerate()
        .filter(|&(k, _)| k != i && k != j)
        .map(|(_, &x)| x)
        .collect()
}

/// How a builtin charge operad contracts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum XiRule {
    /// `ξ(x) = x`.
    Identity,
    /// `ξ(x) = x + 1`.
    PlusOne,
    /// `ξ(x) = x + (arity of x mod 2)`; breaks the ∘/ξ interchange.
    ArityParity,
}

/// Every entry set is a singleton.
#[derive(Clone, Debug)]
pub struct TerminalOperad {
    pub colours: Vec<String>,
    pub dagger: Vec<Colour>,
    pub max_arity: usize,
}

impl TerminalOperad {
    pub fn one_coloured(max_arity: usize) -> Self {
        Self {
            colours: vec!["c".into()],
            dagger: vec![0],
            max_arity,
        }
    }

    /// Two colours exchanged by the dagger.
    pub fn dagger_swap(max_arity: usize) -> Self {
        Self {
            colours: vec!["p".into(), "q".into()],
            dagger: vec![1, 0],
            max_arity,
        }
    }
}

impl ModularOperad for TerminalOperad {
    fn name(&self) -> String {
        if self.colours.len() == 1 {
            "terminal".into()
        } else {
            "terminal-swap".into()
        }
    }
    fn colour_count(&self) -> usize {
        self.colours.len()
    }
    fn colour_name(&self, c: Colour) -> String {
        self.colours[c].clone()
    }
    fn dagger(&self, c: Colour) -> Colour {
        self.dagger[c]
    }
    fn max_arity(&self) -> usize {
        self.max_arity
    }
    fn max_genus(&self) -> Option<u32> {
        None
    }
    fn entry_count(&self, genus: u32, profile: &[Colour]) -> usize {
        usize::from(genus == 0 && profile.len() <= self.max_arity)
    }
    fn elem_name(&self, _: u32, _: &[Colour], _: Elem) -> String {
        "*".into()
    }
    fn act(&self, _: u32, _: &[Colour], _: &[usize], x: Elem) -> Elem {
        x
    }
    fn unit(&self, _: Colour) -> Elem {
        0
    }
    fn compose(
        &self,
        _: u32,
        c: &[Colour],
        i: usize,
        _: Elem,
        _: u32,
        d: &[Colour],
        j: usize,
        _: Elem,
    ) -> Option<Elem> {
        (c[i] == self.dagger[d[j]] && c.len() + d.len() - 2 <= self.max_arity).then_some(0)
    }
    fn contract(&self, _: u32, c: &[Colour], i: usize, j: usize, _: Elem) -> Option<Elem> {
        (i < j && c[i] == self.dagger[c[j]]).then_some(0)
    }
}

/// Entries `ℤ/2` for every profile of arity at most `max_arity`; `∘` adds,
/// the unit is 0 and `Σ` acts trivially.
#[derive(Clone, Debug)]
pub struct ChargeOperad {
    pub colours: Vec<String>,
    pub dagger: Vec<Colour>,
    pub max_arity: usize,
    pub xi: XiRule,
    /// Graded by genus up to this bound.
    pub max_genus: Option<u32>,
}

impl ChargeOperad {
    pub fn new(max_arity: usize) -> Self {
        Self {
            colours: vec!["c".into()],
            dagger: vec![0],
            max_arity,
            xi: XiRule::Identity,
            max_genus: None,
        }
    }

    pub fn with_xi(mut self, xi: XiRule) -> Self {
        self.xi = xi;
        self
    }

    pub fn dagger_swap(max_arity: usize) -> Self {
        Self {
            colours: vec!["p".into(), "q".into()],
            dagger: vec![1, 0],
            ..Self::new(max_arity)
        }
    }

    pub fn graded(max_arity: usize, max_genus: u32) -> Self {
        Self {
            max_genus: Some(max_genus),
            ..Self::new(max_arity)
        }
    }
}

impl ModularOperad for ChargeOperad {
    fn name(&self) -> String {
        let base = match (self.colours.len(), self.max_genus) {
            (_, Some(_)) => "graded-charge",
            (1, None) => "charge",
            _ => "charge-swap",
        };
        match self.xi {
            XiRule::Identity => base.to_string(),
            XiRule::PlusOne => format!("{base}-xi-plus-one"),
            XiRule::ArityParity => format!("{base}-xi-parity"),
        }
    }
    fn colour_count(&self) -> usize {
        self.colours.len()
    }
    fn colour_name(&self, c: Colour) -> String {
        self.colours[c].clone()
    }
    fn dagger(&self, c: Colour) -> Colour {
        self.dagger[c]
    }
    fn max_arity(&self) -> usize {
        self.max_arity
    }
    fn max_genus(&self) -> Option<u32> {
        self.max_genus
    }
    fn entry_count(&self, genus: u32, profile: &[Colour]) -> usize {
        let g_ok = genus <= self.max_genus.unwrap_or(0);
        if g_ok && profile.len() <= self.max_arity {
            2
        } else {
            0
        }
    }
    fn elem_name(&self, _: u32, _: &[Colour], x: Elem) -> String {
        x.to_string()
    }
    fn act(&self, _: u32, _: &[Colour], _: &[usize], x: Elem) -> Elem {
        x
    }
    fn unit(&self, _: Colour) -> Elem {
        0
    }
    fn compose(
        &self,
        g1: u32,
        c: &[Colour],
        i: usize,
        x: Elem,
        g2: u32,
        d: &[Colour],
        j: usize,
        y: Elem,
    ) -> Option<Elem> {
        if c[i] != self.dagger[d[j]] || c.len() + d.len() - 2 > self.max_arity {
            return None;
        }
        if self.comp_genus(g1, g2) > self.max_genus.unwrap_or(0) {
            return None;
        }
        Some((x + y) % 2)
    }
    fn contract(&self, g: u32, c: &[Colour], i: usize, j: usize, x: Elem) -> Option<Elem> {
        if i >= j || c[i] != self.dagger[c[j]] {
            return None;
        }
        if self.contract_genus(g) > self.max_genus.unwrap_or(0) {
            return None;
        }
        Some(match self.xi {
            XiRule::Identity => x,
            XiRule::PlusOne => (x + 1) % 2,
            XiRule::ArityParity => (x + c.len()) % 2,
        })
    }
}

/// Tensors over `V = F₂²` with the dot product: `P(n) = V^{⊗n}`, `∘` and `ξ`
/// contract with the form, `Σ` permutes factors. An entry is the bit table of
/// its coefficients, coordinate `x ∈ {0,1}ⁿ` at bit `Σ x_k 2^k`.
#[derive(Clone, Debug)]
pub struct TensorOperad {
    pub max_arity: usize,
}

impl TensorOperad {
    /// Entry sets have `2^(2^n)` elements, so the arity is capped at 4.
    pub fn new(max_arity: usize) -> Self {
        Self {
            max_arity: max_arity.min(4),
        }
    }

    fn coeff(x: Elem, idx: usize) -> usize {
        (x >> idx) & 1
    }
}

impl ModularOperad for TensorOperad {
    fn name(&self) -> String {
        "tensor".into()
    }
    fn colour_count(&self) -> usize {
        1
    }
    fn colour_name(&self, _: Colour) -> String {
        "V".into()
    }
    fn dagger(&self, c: Colour) -> Colour {
        c
    }
    fn max_arity(&self) -> usize {
        self.max_arity
    }
    fn max_genus(&self) -> Option<u32> {
        None
    }
    fn entry_count(&self, genus: u32, profile: &[Colour]) -> usize {
        if genus == 0 && profile.len() <= self.max_arity {
            1 << (1 << profile.len())
        } else {
            0
        }
    }
    fn elem_name(&self, _: u32, profile: &[Colour], x: Elem) -> String {
        format!("{:0w$b}", x, w = 1 << profile.len())
    }
    fn act(&self, _: u32, profile: &[Colour], perm: &[usize], x: Elem) -> Elem {
        let n = profile.len();
        let mut out = 0;
        for y in 0..1usize << n {
            let src: usize = (0..n).map(|k| ((y >> k) & 1) << perm[k]).sum();
            out |= Self::coeff(x, src) << y;
        }
        out
    }
    fn unit(&self, _: Colour) -> Elem {
        // δ_ab: coordinates 00 and 11.
        0b1001
    }
    fn compose(
        &self,
        _: u32,
        c: &[Colour],
        i: usize,
        x: Elem,
        _: u32,
        d: &[Colour],
        j: usize,
        y: Elem,
    ) -> Option<Elem> {
        let (m, n) = (c.len(), d.len());
        if m + n - 2 > self.max_arity {
            return None;
        }
        let spread = |u: usize, at: usize, a: usize| {
            let low = u & ((1 << at) - 1);
            low | (a << at) | ((u >> at) << (at + 1))
        };
        let mut out = 0;
        for u in 0..1usize << (m - 1) {
            for w in 0..1usize << (n - 1) {
                let s = (0..2)
                    .map(|a| Self::coeff(x, spread(u, i, a)) & Self::coeff(y, spread(w, j, a)))
                    .sum::<usize>();
                out |= (s & 1) << (u | (w << (m - 1)));
            }
        }
        Some(out)
    }
    fn contract(&self, _: u32, c: &[Colour], i: usize, j: usize, x: Elem) -> Option<Elem> {
        if i >= j {
            return None;
        }
        let n = c.len();
        let mut out = 0;
        for u in 0..1usize << (n - 2) {
            let mut s = 0;
            for a in 0..2 {
                let mut bits = Vec::with_capacity(n);
                let mut rest = u;
                for k in 0..n {
                    if k == i || k == j {
                        bits.push(a);
                    } else {
                        bits.push(rest & 1);
                        rest >>= 1;
                    }
                }
                let idx: usize = bits.iter().enumerate().map(|(k, &b)| b << k).sum();
                s += Self::coeff(x, idx);
            }
            out |= (s & 1) << u;
        }
        Some(out)
    }
}

/// Forgets the contractions.
#[derive(Clone)]
pub struct UnderlyingCyclic(pub OperadRef);

impl ModularOperad for UnderlyingCyclic {
    fn name(&self) -> String {
        format!("cyclic({})", self.0.name())
    }
    fn colour_count(&self) -> usize {
        self.0.colour_count()
    }
    fn colour_name(&self, c: Colour) -> String {
        self.0.colour_name(c)
    }
    fn dagger(&self, c: Colour) -> Colour {
        self.0.dagger(c)
    }
    fn max_arity(&self) -> usize {
        self.0.max_arity()
    }
    fn max_genus(&self) -> Option<u32> {
        self.0.max_genus()
    }
    fn entry_count(&self, genus: u32, profile: &[Colour]) -> usize {
        self.0.entry_count(genus, profile)
    }
    fn elem_name(&self, genus: u32, profile: &[Colour], x: Elem) -> String {
        self.0.elem_name(genus, profile, x)
    }
    fn act(&self, genus: u32, profile: &[Colour], perm: &[usize], x: Elem) -> Elem {
        self.0.act(genus, profile, perm, x)
    }
    fn unit(&self, c: Colour) -> Elem {
        self.0.unit(c)
    }
    fn compose(
        &self,
        g1: u32,
        c: &[Colour],
        i: usize,
        x: Elem,
        g2: u32,
        d: &[Colour],
        j: usize,
        y: Elem,
    ) -> Option<Elem> {
        self.0.compose(g1, c, i, x, g2, d, j, y)
    }
    fn contract(&self, _: u32, _: &[Colour], _: usize, _: usize, _: Elem) -> Option<Elem> {
        None
    }
    fn has_contractions(&self) -> bool {
        false
    }
}

/// Empties every entry of genus above `k`.
#[derive(Clone)]
pub struct TruncateGenus {
    pub inner: OperadRef,
    pub k: Option<u32>,
}

impl ModularOperad for TruncateGenus {
    fn name(&self) -> String {
        match self.k {
            Some(k) => format!("truncate({}, {k})", self.inner.name()),
            None => self.inner.name(),
        }
    }
    fn colour_count(&self) -> usize {
        self.inner.colour_count()
    }
    fn colour_name(&self, c: Colour) -> String {
        self.inner.colour_name(c)
    }
    fn dagger(&self, c: Colour) -> Colour {
        self.inner.dagger(c)
    }
    fn max_arity(&self) -> usize {
        self.inner.max_arity()
    }
    fn max_genus(&self) -> Option<u32> {
        match (self.inner.max_genus(), self.k) {
            (Some(g), Some(k)) => Some(g.min(k)),
            (g, _) => g,
        }
    }
    fn entry_count(&self, genus: u32, profile: &[Colour]) -> usize {
        if self.k.is_some_and(|k| genus > k) {
            0
        } else {
            self.inner.entry_count(genus, profile)
        }
    }
    fn elem_name(&self, genus: u32, profile: &[Colour], x: Elem) -> String {
        self.inner.elem_name(genus, profile, x)
    }
    fn act(&self, genus: u32, profile: &[Colour], perm: &[usize], x: Elem) -> Elem {
        self.inner.act(genus, profile, perm, x)
    }
    fn unit(&self, c: Colour) -> Elem {
        self.inner.unit(c)
    }
    fn compose(
        &self,
        g1: u32,
        c: &[Colour],
        i: usize,
        x: Elem,
        g2: u32,
        d: &[Colour],
        j: usize,
        y: Elem,
    ) -> Option<Elem> {
        if self.k.is_some_and(|k| self.comp_genus(g1, g2) > k) {
            return None;
        }
        self.inner.compose(g1, c, i, x, g2, d, j, y)
    }
    fn contract(&self, g: u32, c: &[Colour], i: usize, j: usize, x: Elem) -> Option<Elem> {
        if self.k.is_some_and(|k| self.contract_genus(g) > k) {
            return None;
        }
        self.inner.contract(g, c, i, j, x)
    }
    fn has_contractions(&self) -> bool {
        self.inner.has_contractions()
    }
}

pub fn underlying_cyclic(p: OperadRef) -> OperadRef {
    Arc::new(UnderlyingCyclic(p))
}

/// `k = None` leaves the operad unchanged.
pub fn truncate_genus(p: OperadRef, k: Option<u32>) -> OperadRef {
    Arc::new(TruncateGenus { inner: p, k })
}

/// Builtin operads by name, e.g. `charge`, `terminal-swap`, `graded-charge`.
pub fn builtin(name: &str, max_arity: usize) -> Result<OperadRef, OperadError> {
    Ok(match name {
        "terminal" => Arc::new(TerminalOperad::one_coloured(max_arity)),
        "terminal-swap" => Arc::new(TerminalOperad::dagger_swap(max_arity)),
        "charge" => Arc::new(ChargeOperad::new(max_arity)),
        "charge-swap" => Arc::new(ChargeOperad::dagger_swap(max_arity)),
        "charge-xi-plus-one" => Arc::new(ChargeOperad::new(max_arity).with_xi(XiRule::PlusOne)),
        "charge-xi-parity" => Arc::new(ChargeOperad::new(max_arity).with_xi(XiRule::ArityParity)),
        "graded-charge" => Arc::new(ChargeOperad::graded(max_arity, 2)),
        "tensor" => Arc::new(TensorOperad::new(max_arity)),
        other => return Err(OperadError::UnknownOperad(other.to_string())),
    })
}

pub const BUILTIN_NAMES: &[&str] = &[
    "terminal",
    "terminal-swap",
    "charge",
    "charge-swap",
    "charge-xi-plus-one",
    "charge-xi-parity",
    "graded-charge",
    "tensor",
];

/// All colour profiles of length `n`.
pub fn profiles(colours: usize, n: usize) -> Vec<Vec<Colour>> {
    if n == 0 {
        return vec![vec![]];
    }
    (0..n)
        .map(|_| 0..colours)
        .multi_cartesian_product()
        .collect()
}

/// Applies a permutation given as a sequence of adjacent transpositions.
pub(crate) fn adjacent_decomposition(perm: &[usize]) -> Vec<usize> {
    let mut cur: Vec<usize> = (0..perm.len()).collect();
    let mut steps = Vec::new();
    for pos in 0..perm.len() {
        let j = (pos..perm.len()).find(|&j| cur[j] == perm[pos]).unwrap();
        for k in (pos..j).rev() {
            cur.swap(k, k + 1);
            steps.push(k);
        }
    }
    steps
}

// ---------------------------------------------------------------------------
// Table operads and JSON.

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaJson {
    pub profile: String,
    /// Swaps positions `k` and `k+1`.
    pub k: usize,
    pub map: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompJson {
    pub left: String,
    pub i: usize,
    pub right: String,
    pub j: usize,
    /// Rows `[x, y, x ∘ y]`.
    pub table: Vec<[String; 3]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractJson {
    pub profile: String,
    pub i: usize,
    pub j: usize,
    /// Rows `[x, ξ(x)]`.
    pub table: Vec<[String; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperadJson {
    pub name: String,
    pub colours: Vec<String>,
    pub dagger: Vec<[String; 2]>,
    pub max_arity: usize,
    #[serde(default)]
    pub max_genus: Option<u32>,
    /// Profile keys are comma-joined colour names, prefixed `g|` when graded.
    pub entries: BTreeMap<String, Vec<String>>,
    pub units: BTreeMap<String, String>,
    #[serde(default)]
    pub sigma: Vec<SigmaJson>,
    #[serde(default)]
    pub comp: Vec<CompJson>,
    #[serde(default)]
    pub contract: Vec<ContractJson>,
}

type ProfileKey = (u32, Vec<Colour>);

/// A modular operad given by explicit tables.
#[derive(Clone, Debug)]
pub struct TableOperad {
    name: String,
    colours: Vec<String>,
    dagger: Vec<Colour>,
    max_arity: usize,
    max_genus: Option<u32>,
    entries: HashMap<ProfileKey, Vec<String>>,
    units: Vec<Elem>,
    sigma: HashMap<(ProfileKey, usize), Vec<Elem>>,
    comp: HashMap<(ProfileKey, usize, ProfileKey, usize), HashMap<(Elem, Elem), Elem>>,
    contract: HashMap<(ProfileKey, usize, usize), HashMap<Elem, Elem>>,
}

fn bad(s: impl Into<String>) -> OperadError {
    OperadError::InvalidTable(s.into())
}

impl TableOperad {
    pub fn from_json(j: &OperadJson) -> Result<Self, OperadError> {
        let cid: HashMap<&str, Colour> = j
            .colours
            .iter()
            .enumerate()
            .map(|(k, c)| (c.as_str(), k))
            .collect();
        let col = |s: &str| cid.get(s).copied().ok_or_else(|| bad(format!("unknown colour `{s}`")));
        let mut dagger: Vec<Option<Colour>> = vec![None; j.colours.len()];
        for [a, b] in &j.dagger {
            let (a, b) = (col(a)?, col(b)?);
            for (x, y) in [(a, b), (b, a)] {
                if dagger[x].is_some_and(|z| z != y) {
                    return Err(bad("dagger is not an involution"));
                }
                dagger[x] = Some(y);
            }
        }
        let dagger: Vec<Colour> = dagger
            .iter()
            .enumerate()
            .map(|(k, d)| d.unwrap_or(k))
            .collect();
        let parse = |key: &str| -> Result<ProfileKey, OperadError> {
            let (g, rest) = match key.split_once('|') {
                Some((g, r)) => (g.parse::<u32>().map_err(|_| bad(format!("bad genus in `{key}`")))?, r),
                None => (0, key),
            };
            let cols = if rest.is_empty() {
                vec![]
            } else {
                rest.split(',').map(|c| col(c.trim())).collect::<Result<_, _>>()?
            };
            Ok((g, cols))
        };
        let mut entries = HashMap::new();
        for (k, v) in &j.entries {
            let key = parse(k)?;
            if key.1.len() > j.max_arity {
                return Err(bad(format!("profile `{k}` exceeds max_arity")));
            }
            entries.insert(key, v.clone());
        }
        let elem = |key: &ProfileKey, name: &str| -> Result<Elem, OperadError> {
            entries
                .get(key)
                .and_then(|v| v.iter().position(|x| x == name))
                .ok_or_else(|| bad(format!("unknown element `{name}`")))
        };
        let mut units = vec![usize::MAX; j.colours.len()];
        for (c, x) in &j.units {
            let c = col(c)?;
            units[c] = elem(&(0, vec![dagger[c], c]), x)?;
        }
        if units.contains(&usize::MAX) {
            return Err(bad("missing unit"));
        }
        let mut sigma = HashMap::new();
        for s in &j.sigma {
            let key = parse(&s.profile)?;
            if s.k + 1 >= key.1.len() {
                return Err(bad("transposition out of range"));
            }
            let mut to = key.1.clone();
            to.swap(s.k, s.k + 1);
            let to = (key.0, to);
            let n = entries.get(&key).map_or(0, Vec::len);
            let mut table = vec![usize::MAX; n];
            for (x, y) in &s.map {
                table[elem(&key, x)?] = elem(&to, y)?;
            }
            if table.contains(&usize::MAX) {
                return Err(bad(format!("sigma table for `{}` is partial", s.profile)));
            }
            sigma.insert((key, s.k), table);
        }
        let mut comp: HashMap<_, HashMap<(Elem, Elem), Elem>> = HashMap::new();
        for c in &j.comp {
            let (l, r) = (parse(&c.left)?, parse(&c.right)?);
            if c.i >= l.1.len() || c.j >= r.1.len() {
                return Err(bad("composition position out of range"));
            }
            let out = (l.0 + r.0, comp_profile(&l.1, c.i, &r.1, c.j));
            let out = if j.max_genus.is_some() { out } else { (0, out.1) };
            let t = comp.entry((l.clone(), c.i, r.clone(), c.j)).or_default();
            for [x, y, z] in &c.table {
                t.insert((elem(&l, x)?, elem(&r, y)?), elem(&out, z)?);
            }
        }
        let mut contract: HashMap<_, HashMap<Elem, Elem>> = HashMap::new();
        for c in &j.contract {
            let p = parse(&c.profile)?;
            if c.i >= c.j || c.j >= p.1.len() {
                return Err(bad("contraction positions must satisfy i < j < arity"));
            }
            let g = if j.max_genus.is_some() { p.0 + 1 } else { 0 };
            let out = (g, contract_profile(&p.1, c.i, c.j));
            let t = contract.entry((p.clone(), c.i, c.j)).or_default();
            for [x, z] in &c.table {
                t.insert(elem(&p, x)?, elem(&out, z)?);
            }
        }
        Ok(Self {
            name: j.name.clone(),
            colours: j.colours.clone(),
            dagger,
            max_arity: j.max_arity,
            max_genus: j.max_genus,
            entries,
            units,
            sigma,
            comp,
            contract,
        })
    }
}

impl ModularOperad for TableOperad {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn colour_count(&self) -> usize {
        self.colours.len()
    }
    fn colour_name(&self, c: Colour) -> String {
        self.colours[c].clone()
    }
    fn dagger(&self, c: Colour) -> Colour {
        self.dagger[c]
    }
    fn max_arity(&self) -> usize {
        self.max_arity
    }
    fn max_genus(&self) -> Option<u32> {
        self.max_genus
    }
    fn entry_count(&self, genus: u32, profile: &[Colour]) -> usize {
        self.entries
            .get(&(genus, profile.to_vec()))
            .map_or(0, Vec::len)
    }
    fn elem_name(&self, genus: u32, profile: &[Colour], x: Elem) -> String {
        self.entries[&(genus, profile.to_vec())][x].clone()
    }
    fn act(&self, genus: u32, profile: &[Colour], perm: &[usize], x: Elem) -> Elem {
        let mut cur = profile.to_vec();
        let mut x = x;
        for k in adjacent_decomposition(perm) {
            if let Some(t) = self.sigma.get(&((genus, cur.clone()), k)) {
                x = t[x];
            }
            cur.swap(k, k + 1);
        }
        x
    }
    fn unit(&self, c: Colour) -> Elem {
        self.units[c]
    }
    fn compose(
        &self,
        g1: u32,
        c: &[Colour],
        i: usize,
        x: Elem,
        g2: u32,
        d: &[Colour],
        j: usize,
        y: Elem,
    ) -> Option<Elem> {
        self.comp
            .get(&((g1, c.to_vec()), i, (g2, d.to_vec()), j))?
            .get(&(x, y))
            .copied()
    }
    fn contract(&self, g: u32, c: &[Colour], i: usize, j: usize, x: Elem) -> Option<Elem> {
        self.contract.get(&((g, c.to_vec()), i, j))?.get(&x).copied()
    }
    fn has_contractions(&self) -> bool {
        !self.contract.is_empty()
    }
}

fn profile_key(p: &dyn ModularOperad, g: u32, c: &[Colour]) -> String {
    let cols = c.iter().map(|&x| p.colour_name(x)).join(",");
    if p.graded() {
        format!("{g}|{cols}")
    } else {
        cols
    }
}

/// Writes every table of `p` up to `max_arity` (and its genus bound).
pub fn materialize(p: &dyn ModularOperad, max_arity: usize) -> OperadJson {
    let nc = p.colour_count();
    let mut entries = BTreeMap::new();
    let mut sigma = Vec::new();
    let mut comp = Vec::new();
    let mut contract = Vec::new();
    let all: Vec<(u32, Vec<Colour>)> = p
        .genus_range()
        .flat_map(|g| (0..=max_arity).flat_map(move |n| profiles(nc, n).into_iter().map(move |c| (g, c))))
        .filter(|(g, c)| p.entry_count(*g, c) > 0)
        .collect();
    let name = |g: u32, c: &[Colour], x: Elem| p.elem_name(g, c, x);
    for (g, c) in &all {
        let n = p.entry_count(*g, c);
        entries.insert(profile_key(p, *g, c), (0..n).map(|x| name(*g, c, x)).collect());
        for k in 0..c.len().saturating_sub(1) {
            let mut perm: Vec<usize> = (0..c.len()).collect();
            perm.swap(k, k + 1);
            let mut to = c.clone();
            to.swap(k, k + 1);
            sigma.push(SigmaJson {
                profile: profile_key(p, *g, c),
                k,
                map: (0..n)
                    .map(|x| (name(*g, c, x), name(*g, &to, p.act(*g, c, &perm, x))))
                    .collect(),
            });
        }
        if p.has_contractions() {
            for (i, j) in (0..c.len()).tuple_combinations() {
                if c[i] != p.dagger(c[j]) {
                    continue;
                }
                let out = contract_profile(c, i, j);
                let go = p.contract_genus(*g);
                let table: Vec<[String; 2]> = (0..n)
                    .filter_map(|x| {
                        p.contract(*g, c, i, j, x)
                            .map(|z| [name(*g, c, x), name(go, &out, z)])
                    })
                    .collect();
                if !table.is_empty() {
                    contract.push(ContractJson {
                        profile: profile_key(p, *g, c),
                        i,
                        j,
                        table,
                    });
                }
            }
        }
    }
    for (g1, c) in &all {
        for (g2, d) in &all {
            if c.len() + d.len() < 2 || c.len() + d.len() - 2 > max_arity {
                continue;
            }
            for i in 0..c.len() {
                for j in 0..d.len() {
                    if c[i] != p.dagger(d[j]) {
                        continue;
                    }
                    let out = comp_profile(c, i, d, j);
                    let go = p.comp_genus(*g1, *g2);
                    let mut table = Vec::new();
                    for x in 0..p.entry_count(*g1, c) {
                        for y in 0..p.entry_count(*g2, d) {
                            if let Some(z) = p.compose(*g1, c, i, x, *g2, d, j, y) {
                                table.push([name(*g1, c, x), name(*g2, d, y), name(go, &out, z)]);
                            }
                        }
                    }
                    if !table.is_empty() {
                        comp.push(CompJson {
                            left: profile_key(p, *g1, c),
                            i,
                            right: profile_key(p, *g2, d),
                            j,
                            table,
                        });
                    }
                }
            }
        }
    }
    let mut dagger = Vec::new();
    for c in 0..nc {
        let d = p.dagger(c);
        if c <= d {
            dagger.push([p.colour_name(c), p.colour_name(d)]);
        }
    }
    OperadJson {
        name: p.name(),
        colours: (0..nc).map(|c| p.colour_name(c)).collect(),
        dagger,
        max_arity: max_arity.min(p.max_arity()),
        max_genus: p.max_genus(),
        entries,
        units: (0..nc)
            .map(|c| {
                (
                    p.colour_name(c),
                    name(0, &[p.dagger(c), c], p.unit(c)),
                )
            })
            .collect(),
        sigma,
        comp,
        contract,
    }
}

/// Checks that two operads agree entry by entry up to `max_arity`: same
/// colours and dagger, entry counts, units, `Σ`, `∘` and `ξ`, elements
/// matched by index. Reports the first difference.
pub fn compare_operads(p: &dyn ModularOperad, q: &dyn ModularOperad, max_arity: usize) -> Result<(), String> {
    let nc = p.colour_count();
    if nc != q.colour_count() {
        return Err(format!("colour counts {} ≠ {}", nc, q.colour_count()));
    }
    for c in 0..nc {
        if p.dagger(c) != q.dagger(c) {
            return Err(format!("dagger differs at colour {c}"));
        }
        if p.unit(c) != q.unit(c) {
            return Err(format!("unit differs at colour {c}"));
        }
    }
    let genera = |o: &dyn ModularOperad| o.genus_range().collect::<Vec<_>>();
    if genera(p) != genera(q) {
        return Err("genus ranges differ".into());
    }
    let shapes: Vec<(u32, Vec<Colour>)> = p
        .genus_range()
        .flat_map(|g| (0..=max_arity).flat_map(move |n| profiles(nc, n).into_iter().map(move |c| (g, c))))
        .collect();
    for (g, c) in &shapes {
        let n = p.entry_count(*g, c);
        if n != q.entry_count(*g, c) {
            return Err(format!("entry counts differ at {c:?} genus {g}"));
        }
        for perm in (0..c.len()).permutations(c.len()) {
            for x in 0..n {
                if p.act(*g, c, &perm, x) != q.act(*g, c, &perm, x) {
                    return Err(format!("Σ differs at {c:?} by {perm:?} on {x}"));
                }
            }
        }
        for (i, j) in (0..c.len()).tuple_combinations() {
            for x in 0..n {
                if p.contract(*g, c, i, j, x) != q.contract(*g, c, i, j, x) {
                    return Err(format!("ξ_{i},{j} differs at {c:?} on {x}"));
                }
            }
        }
    }
    for ((g1, c), (g2, d)) in shapes.iter().cartesian_product(&shapes) {
        if c.len() + d.len() < 2 || c.len() + d.len() - 2 > max_arity {
            continue;
        }
        for (i, j) in (0..c.len()).cartesian_product(0..d.len()) {
            if c[i] != p.dagger(d[j]) {
                continue;
            }
            for (x, y) in (0..p.entry_count(*g1, c)).cartesian_product(0..p.entry_count(*g2, d)) {
                if p.compose(*g1, c, i, x, *g2, d, j, y) != q.compose(*g1, c, i, x, *g2, d, j, y) {
                    return Err(format!("∘_{i},{j} differs at {c:?}, {d:?} on {x}, {y}"));
                }
            }
        }
    }
    Ok(())
}
