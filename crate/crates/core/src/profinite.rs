//! Finite stages of profinite objects: inverse systems of finite sets and
//! groups, truncated profinite integers, and finite groupoids.
//!
//! Nothing here represents an honest profinite limit. Every object is cut off
//! at a finite level set, where the limit is a finite set of tuples.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest group order accepted by the brute-force routines.
pub const MAX_GROUP_ORDER: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProfiniteError {
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("group of order {0} exceeds the cap of {MAX_GROUP_ORDER}")]
    TooLarge(usize),
    #[error("invalid inverse system: {0}")]
    InvalidSystem(String),
    #[error("incompatible levels: {0}")]
    IncompatibleLevels(String),
    #[error("invalid groupoid: {0}")]
    InvalidGroupoid(String),
    #[error("invalid functor: {0}")]
    InvalidFunctor(String),
}

// ---------------------------------------------------------------------------
// Finite groups

/// A group given by its multiplication table; element 0 need not be the
/// identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupTable")]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    names: Vec<String>,
}

#[derive(Deserialize)]
struct GroupTable {
    table: Vec<Vec<usize>>,
    #[serde(default)]
    names: Vec<String>,
}

impl TryFrom<GroupTable> for FiniteGroup {
    type Error = ProfiniteError;

    fn try_from(t: GroupTable) -> Result<Self, Self::Error> {
        Self::with_names(t.table, t.names)
    }
}

impl FiniteGroup {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self, ProfiniteError> {
        Self::with_names(table, vec![])
    }

    pub fn with_names(table: Vec<Vec<usize>>, names: Vec<String>) -> Result<Self, ProfiniteError> {
        let g = Self { table, names };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<(), ProfiniteError> {
        let n = self.table.len();
        let bad = |s: String| Err(ProfiniteError::NotAGroup(s));
        if n == 0 {
            return bad("empty table".into());
        }
        if n > MAX_GROUP_ORDER {
            return Err(ProfiniteError::TooLarge(n));
        }
        if !self.names.is_empty() && self.names.len() != n {
            return bad(format!("{} names for {n} elements", self.names.len()));
        }
        if self.table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return bad("table is not square over its elements".into());
        }
        for row in &self.table {
            if row.iter().collect::<BTreeSet<_>>().len() != n {
                return bad("a row is not a permutation".into());
            }
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|x| self.table[e][x] == x && self.table[x][e] == x));
        if e.is_none() {
            return bad("no identity".into());
        }
        for (a, b, c) in (0..n).cartesian_product(0..n).cartesian_product(0..n).map(|((a, b), c)| (a, b, c)) {
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                return bad(format!("({a}·{b})·{c} ≠ {a}·({b}·{c})"));
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn identity(&self) -> usize {
        (0..self.order()).find(|&e| self.table[e][e] == e).unwrap()
    }

    pub fn inv(&self, a: usize) -> usize {
        let e = self.identity();
        (0..self.order()).find(|&b| self.mul(a, b) == e).unwrap()
    }

    pub fn pow(&self, a: usize, k: i64) -> usize {
        let base = if k < 0 { self.inv(a) } else { a };
        (0..k.unsigned_abs()).fold(self.identity(), |acc, _| self.mul(acc, base))
    }

    pub fn name(&self, a: usize) -> String {
        self.names.get(a).cloned().unwrap_or_else(|| a.to_string())
    }

    /// Looks an element up by name or by index.
    pub fn element(&self, s: &str) -> Option<usize> {
        self.names
            .iter()
            .position(|n| n == s)
            .or_else(|| s.parse().ok().filter(|&k| k < self.order()))
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).tuple_combinations().all(|(a, b)| self.mul(a, b) == self.mul(b, a))
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::with_names(table, (0..n).map(|k| k.to_string()).collect()).expect("ℤ/n")
    }

    pub fn product(&self, other: &Self) -> Self {
        let m = other.order();
        let n = self.order() * m;
        let table = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| self.mul(x / m, y / m) * m + other.mul(x % m, y % m))
                    .collect()
            })
            .collect();
        let names = (0..n)
            .map(|x| format!("({},{})", self.name(x / m), other.name(x % m)))
            .collect();
        Self::with_names(table, names).expect("product of groups")
    }

    /// The permutation group generated by `gens`, each a permutation of
    /// `0..degree` in one-line notation. Composition is `(στ)(i) = σ(τ(i))`.
    pub fn from_permutations(gens: &[Vec<usize>]) -> Result<Self, ProfiniteError> {
        let degree = gens.first().map_or(0, Vec::len);
        let id: Vec<usize> = (0..degree).collect();
        let mut elems = vec![id.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(id, 0)]);
        let mut queue = VecDeque::from([0]);
        while let Some(k) = queue.pop_front() {
            for s in gens {
                let p: Vec<usize> = elems[k].iter().map(|&i| s[i]).collect();
                if !index.contains_key(&p) {
                    if elems.len() == MAX_GROUP_ORDER {
                        return Err(ProfiniteError::TooLarge(MAX_GROUP_ORDER + 1));
                    }
                    index.insert(p.clone(), elems.len());
                    queue.push_back(elems.len());
                    elems.push(p);
                }
            }
        }
        let table = elems
            .iter()
            .map(|s| {
                elems
                    .iter()
                    .map(|t| index[&t.iter().map(|&i| s[i]).collect::<Vec<_>>()])
                    .collect()
            })
            .collect();
        let names = elems.iter().map(|p| cycle_notation(p)).collect();
        Self::with_names(table, names)
    }

    pub fn symmetric(n: usize) -> Self {
        if n < 2 {
            return Self::cyclic(1);
        }
        let swap: Vec<usize> = (0..n).map(|i| [1, 0].get(i).copied().unwrap_or(i)).collect();
        let rot: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        Self::from_permutations(&[swap, rot]).expect("S_n")
    }

    pub fn alternating4() -> Self {
        Self::from_permutations(&[vec![1, 2, 0, 3], vec![1, 0, 3, 2]]).expect("A₄")
    }

    /// Symmetries of the regular `n`-gon, of order `2n`.
    pub fn dihedral(n: usize) -> Self {
        let rot: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let refl: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
        Self::from_permutations(&[rot, refl]).expect("dihedral")
    }

    /// `{±1, ±i, ±j, ±k}`; element `4s + u` is `(−1)^s` times unit `u` of
    /// `1, i, j, k`.
    pub fn quaternion() -> Self {
        // units[u][v] = (sign, unit) of u·v
        const UNITS: [[(usize, usize); 4]; 4] = [
            [(0, 0), (0, 1), (0, 2), (0, 3)],
            [(0, 1), (1, 0), (0, 3), (1, 2)],
            [(0, 2), (1, 3), (1, 0), (0, 1)],
            [(0, 3), (0, 2), (1, 1), (1, 0)],
        ];
        let table = (0..8)
            .map(|a: usize| {
                (0..8)
                    .map(|b: usize| {
                        let (s, u) = UNITS[a % 4][b % 4];
                        ((a / 4 + b / 4 + s) % 2) * 4 + u
                    })
                    .collect()
            })
            .collect();
        let names = ["1", "i", "j", "k", "-1", "-i", "-j", "-k"].map(String::from).to_vec();
        Self::with_names(table, names).expect("Q₈")
    }

    /// Subgroup generated by `gens`.
    pub fn generated(&self, gens: &[usize]) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([self.identity()]);
        let mut queue: VecDeque<usize> = seen.iter().copied().collect();
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    pub fn conjugacy_classes(&self) -> Vec<BTreeSet<usize>> {
        let mut seen = vec![false; self.order()];
        let mut out = Vec::new();
        for a in 0..self.order() {
            if seen[a] {
                continue;
            }
            let class: BTreeSet<usize> = (0..self.order())
                .map(|g| self.mul(self.mul(g, a), self.inv(g)))
                .collect();
            for &c in &class {
                seen[c] = true;
            }
            out.push(class);
        }
        out
    }

    /// The smallest normal subgroup containing `gens`.
    pub fn normal_closure(&self, gens: &[usize]) -> BTreeSet<usize> {
        let conj: BTreeSet<usize> = gens
            .iter()
            .flat_map(|&a| (0..self.order()).map(move |g| (g, a)))
            .map(|(g, a)| self.mul(self.mul(g, a), self.inv(g)))
            .collect();
        self.generated(&conj.into_iter().collect::<Vec<_>>())
    }

    /// Every normal subgroup: normal closures of single elements, closed
    /// under joins. Sorted by size, then elements.
    pub fn normal_subgroups(&self) -> Vec<BTreeSet<usize>> {
        let mut found: BTreeSet<BTreeSet<usize>> =
            (0..self.order()).map(|a| self.normal_closure(&[a])).collect();
        loop {
            let joins: Vec<BTreeSet<usize>> = found
                .iter()
                .tuple_combinations()
                .map(|(a, b)| self.generated(&a.union(b).copied().collect::<Vec<_>>()))
                .filter(|j| !found.contains(j))
                .collect();
            if joins.is_empty() {
                break;
            }
            found.extend(joins);
        }
        let mut out: Vec<BTreeSet<usize>> = found.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// `G/N` and the projection `G → G/N`. Cosets are numbered by their
    /// smallest element.
    pub fn quotient(&self, normal: &BTreeSet<usize>) -> (FiniteGroup, Vec<usize>) {
        let mut proj = vec![usize::MAX; self.order()];
        let mut reps = Vec::new();
        for a in 0..self.order() {
            if proj[a] != usize::MAX {
                continue;
            }
            for &n in normal {
                proj[self.mul(a, n)] = reps.len();
            }
            reps.push(a);
        }
        let table = reps
            .iter()
            .map(|&a| reps.iter().map(|&b| proj[self.mul(a, b)]).collect())
            .collect();
        let names = reps.iter().map(|&a| format!("{}N", self.name(a))).collect();
        (
            FiniteGroup::with_names(table, names).expect("quotient of a group"),
            proj,
        )
    }

    /// Whether `f: self → other` is a bijective homomorphism.
    pub fn is_isomorphism(&self, other: &Self, f: &[usize]) -> bool {
        f.len() == self.order()
            && self.order() == other.order()
            && f.iter().collect::<BTreeSet<_>>().len() == f.len()
            && (0..self.order())
                .cartesian_product(0..self.order())
                .all(|(a, b)| f[self.mul(a, b)] == other.mul(f[a], f[b]))
    }
}

fn cycle_notation(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for i in 0..p.len() {
        if seen[i] || p[i] == i {
            continue;
        }
        let mut c = vec![i];
        seen[i] = true;
        let mut j = p[i];
        while j != i {
            seen[j] = true;
            c.push(j);
            j = p[j];
        }
        out.push_str(&format!("({})", c.iter().map(|k| k + 1).join(" ")));
    }
    if out.is_empty() {
        "e".into()
    } else {
        out
    }
}

// ---------------------------------------------------------------------------
// Inverse systems

/// A diagram `X_i` over a finite directed poset with transitions
/// `φ_{ij}: X_i → X_j` for `i ≥ j`. Objects are finite sets `0..size`,
/// optionally carrying a group structure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InverseSystem {
    pub levels: Vec<String>,
    pub sizes: Vec<usize>,
    /// `(i, j, φ_{ij})` for every `i > j`; `φ_{ii}` is implicit.
    pub maps: Vec<(usize, usize, Vec<usize>)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<FiniteGroup>>,
}

impl InverseSystem {
    fn map_index(&self) -> BTreeMap<(usize, usize), &Vec<usize>> {
        self.maps.iter().map(|(i, j, f)| ((*i, *j), f)).collect()
    }

    /// `φ_{ij}` if `i ≥ j`.
    pub fn transition(&self, i: usize, j: usize) -> Option<Vec<usize>> {
        if i == j {
            return Some((0..self.sizes[i]).collect());
        }
        self.map_index().get(&(i, j)).map(|f| f.to_vec())
    }

    pub fn geq(&self, i: usize, j: usize) -> bool {
        i == j || self.maps.iter().any(|(a, b, _)| (*a, *b) == (i, j))
    }

    /// Checks maps are well typed, the order is a directed partial order
    /// and `φ_{jk} ∘ φ_{ij} = φ_{ik}` along every chain `i ≥ j ≥ k`.
    pub fn validate(&self) -> Result<(), ProfiniteError> {
        let n = self.levels.len();
        let bad = |s: String| Err(ProfiniteError::InvalidSystem(s));
        if self.sizes.len() != n {
            return bad("one size per level is required".into());
        }
        let idx = self.map_index();
        if idx.len() != self.maps.len() {
            return bad("a transition is listed twice".into());
        }
        for (i, j, f) in &self.maps {
            if *i >= n || *j >= n || i == j {
                return bad(format!("transition ({i},{j}) is not between distinct levels"));
            }
            if f.len() != self.sizes[*i] || f.iter().any(|&x| x >= self.sizes[*j]) {
                return bad(format!("φ_({i},{j}) is not a map X_{i} → X_{j}"));
            }
            if idx.contains_key(&(*j, *i)) {
                return bad(format!("levels {i} and {j} are mutually comparable"));
            }
        }
        for (i, j, k) in (0..n).cartesian_product(0..n).cartesian_product(0..n).map(|((i, j), k)| (i, j, k)) {
            if !(self.geq(i, j) && self.geq(j, k)) {
                continue;
            }
            let Some(ik) = self.transition(i, k) else {
                return bad(format!("{i} ≥ {j} ≥ {k} but no transition ({i},{k})"));
            };
            let ij = self.transition(i, j).unwrap();
            let jk = self.transition(j, k).unwrap();
            if (0..self.sizes[i]).any(|x| jk[ij[x]] != ik[x]) {
                return bad(format!("φ_({j},{k}) ∘ φ_({i},{j}) ≠ φ_({i},{k})"));
            }
        }
        for (i, j) in (0..n).tuple_combinations() {
            if !(0..n).any(|k| self.geq(k, i) && self.geq(k, j)) {
                return bad(format!("levels {i} and {j} have no upper bound"));
            }
        }
        if let Some(gs) = &self.groups {
            if gs.len() != n || gs.iter().zip(&self.sizes).any(|(g, &s)| g.order() != s) {
                return bad("group orders do not match the level sizes".into());
            }
            for (i, j, f) in &self.maps {
                let (a, b) = (&gs[*i], &gs[*j]);
                let hom = (0..a.order())
                    .cartesian_product(0..a.order())
                    .all(|(x, y)| f[a.mul(x, y)] == b.mul(f[x], f[y]));
                if !hom {
                    return bad(format!("φ_({i},{j}) is not a homomorphism"));
                }
            }
        }
        Ok(())
    }

    /// All compatible tuples `(x_i)`, in lexicographic order.
    pub fn limit(&self) -> Vec<Vec<usize>> {
        let n = self.levels.len();
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n);
        self.extend_limit(&mut cur, &mut out);
        out
    }

    fn extend_limit(&self, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let k = cur.len();
        if k == self.levels.len() {
            out.push(cur.clone());
            return;
        }
        for x in 0..self.sizes[k] {
            let ok = (0..k).all(|i| {
                let down = self.transition(k, i).is_none_or(|f| f[x] == cur[i]);
                let up = self.transition(i, k).is_none_or(|f| f[cur[i]] == x);
                down && up
            });
            if ok {
                cur.push(x);
                self.extend_limit(cur, out);
                cur.pop();
            }
        }
    }

    /// The tower `ℤ/d`, `d | n`, with reductions as transitions.
    pub fn divisor_tower(n: usize) -> Self {
        let divs: Vec<usize> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
        let maps = divs
            .iter()
            .enumerate()
            .cartesian_product(divs.iter().enumerate())
            .filter(|((_, &a), (_, &b))| a != b && a % b == 0)
            .map(|((i, &a), (j, &b))| (i, j, (0..a).map(|x| x % b).collect()))
            .collect();
        Self {
            levels: divs.iter().map(|d| format!("Z/{d}")).collect(),
            sizes: divs.clone(),
            maps,
            groups: Some(divs.iter().map(|&d| FiniteGroup::cyclic(d)).collect()),
        }
    }

    /// The quotients `G/N` over all normal subgroups, ordered by reverse
    /// inclusion, together with the projections `G → G/N`.
    pub fn quotient_system(g: &FiniteGroup) -> (Self, Vec<Vec<usize>>) {
        let normals = g.normal_subgroups();
        let quotients: Vec<(FiniteGroup, Vec<usize>)> =
            normals.iter().map(|n| g.quotient(n)).collect();
        let mut maps = Vec::new();
        for (i, j) in (0..normals.len()).cartesian_product(0..normals.len()) {
            if i != j && normals[i].is_subset(&normals[j]) {
                let (qi, pi) = (&quotients[i].0, &quotients[i].1);
                let pj = &quotients[j].1;
                let mut f = vec![0; qi.order()];
                for a in 0..g.order() {
                    f[pi[a]] = pj[a];
                }
                maps.push((i, j, f));
            }
        }
        let sys = Self {
            levels: normals
                .iter()
                .map(|n| format!("G/{{{}}}", n.iter().map(|&a| g.name(a)).join(",")))
                .collect(),
            sizes: quotients.iter().map(|(q, _)| q.order()).collect(),
            maps,
            groups: Some(quotients.iter().map(|(q, _)| q.clone()).collect()),
        };
        (sys, quotients.into_iter().map(|(_, p)| p).collect())
    }
}

/// Checks that the completion of `g` at its finite quotients is `g`: the
/// canonical map `G → lim G/N` is a bijective homomorphism.
pub fn completion_is_identity(g: &FiniteGroup) -> bool {
    let (sys, projections) = InverseSystem::quotient_system(g);
    if sys.validate().is_err() {
        return false;
    }
    let lim = sys.limit();
    if lim.len() != g.order() {
        return false;
    }
    let groups = sys.groups.as_ref().unwrap();
    let canon: Vec<Vec<usize>> = (0..g.order())
        .map(|a| projections.iter().map(|p| p[a]).collect())
        .collect();
    let distinct = canon.iter().collect::<BTreeSet<_>>().len() == g.order();
    let lands = canon.iter().all(|t| lim.binary_search(t).is_ok());
    let hom = (0..g.order()).cartesian_product(0..g.order()).all(|(a, b)| {
        let ab = &canon[g.mul(a, b)];
        (0..groups.len()).all(|i| ab[i] == groups[i].mul(canon[a][i], canon[b][i]))
    });
    distinct && lands && hom
}

// ---------------------------------------------------------------------------
// Truncated profinite integers

/// A point of `Ẑ` seen at a divisor-closed set of levels: residues
/// `a_n ∈ ℤ/n` with `a_n ≡ a_m mod m` whenever `m | n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfiniteInt {
    levels: Vec<u64>,
    residues: Vec<u64>,
}

pub fn divisor_closure(levels: &[u64]) -> Vec<u64> {
    let mut out: BTreeSet<u64> = BTreeSet::new();
    for &n in levels.iter().filter(|&&n| n > 0) {
        out.extend((1..=n).filter(|d| n % d == 0));
    }
    out.into_iter().collect()
}

fn check_levels(levels: &[u64]) -> Result<(), ProfiniteError> {
    if levels.is_empty() || levels.contains(&0) {
        return Err(ProfiniteError::IncompatibleLevels("levels must be positive and non-empty".into()));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ProfiniteError::IncompatibleLevels("levels must be strictly increasing".into()));
    }
    if divisor_closure(levels) != levels {
        return Err(ProfiniteError::IncompatibleLevels(format!(
            "{levels:?} is not closed under divisors"
        )));
    }
    Ok(())
}

impl ProfiniteInt {
    pub fn new(levels: Vec<u64>, residues: Vec<u64>) -> Result<Self, ProfiniteError> {
        check_levels(&levels)?;
        let bad = |s: String| Err(ProfiniteError::IncompatibleLevels(s));
        if residues.len() != levels.len() {
            return bad("one residue per level is required".into());
        }
        for (&n, &a) in levels.iter().zip(&residues) {
            if a >= n {
                return bad(format!("residue {a} is not reduced mod {n}"));
            }
        }
        for ((&n, &a), (&m, &b)) in levels.iter().zip(&residues).tuple_combinations() {
            if n % m == 0 && a % m != b || m % n == 0 && b % n != a {
                return bad(format!("residues at {n} and {m} disagree"));
            }
        }
        Ok(Self { levels, residues })
    }

    pub fn from_int(k: i64, levels: &[u64]) -> Result<Self, ProfiniteError> {
        check_levels(levels)?;
        let residues = levels
            .iter()
            .map(|&n| k.rem_euclid(n as i64) as u64)
            .collect();
        Ok(Self {
            levels: levels.to_vec(),
            residues,
        })
    }

    pub fn levels(&self) -> &[u64] {
        &self.levels
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn residue(&self, n: u64) -> Option<u64> {
        self.levels.iter().position(|&m| m == n).map(|k| self.residues[k])
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64, u64) -> u64) -> Result<Self, ProfiniteError> {
        if self.levels != other.levels {
            return Err(ProfiniteError::IncompatibleLevels(format!(
                "{:?} vs {:?}",
                self.levels, other.levels
            )));
        }
        let residues = self
            .levels
            .iter()
            .zip(self.residues.iter().zip(&other.residues))
            .map(|(&n, (&a, &b))| f(a, b, n))
            .collect();
        Ok(Self {
            levels: self.levels.clone(),
            residues,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, ProfiniteError> {
        self.zip_with(other, |a, b, n| (a + b) % n)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ProfiniteError> {
        self.zip_with(other, |a, b, n| ((a as u128 * b as u128) % n as u128) as u64)
    }

    pub fn neg(&self) -> Self {
        let residues = self
            .levels
            .iter()
            .zip(&self.residues)
            .map(|(&n, &a)| (n - a) % n)
            .collect();
        Self {
            levels: self.levels.clone(),
            residues,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.levels
            .iter()
            .zip(&self.residues)
            .all(|(&n, &a)| gcd(a, n) == 1)
    }

    /// The least `k ≥ 0` with `from_int(k) = self`, by the Chinese remainder
    /// theorem over the levels.
    pub fn to_int(&self) -> Option<u64> {
        let (mut r, mut m) = (0u128, 1u128);
        for (&n, &a) in self.levels.iter().zip(&self.residues) {
            let (n, a) = (n as u128, a as u128);
            let l = m / gcd128(m, n) * n;
            r = (0..l / m).map(|t| r + t * m).find(|k| k % n == a)?;
            m = l;
        }
        u64::try_from(r).ok()
    }

    /// Every compatible residue tuple at `levels`, built level by level so
    /// that each residue is checked against its divisors.
    pub fn all_points(levels: &[u64]) -> Result<Vec<Self>, ProfiniteError> {
        check_levels(levels)?;
        let mut tuples: Vec<Vec<u64>> = vec![vec![]];
        for (k, &n) in levels.iter().enumerate() {
            tuples = tuples
                .into_iter()
                .flat_map(|t| (0..n).map(move |a| (t.clone(), a)))
                .filter(|(t, a)| (0..k).all(|i| n % levels[i] != 0 || a % levels[i] == t[i]))
                .map(|(mut t, a)| {
                    t.push(a);
                    t
                })
                .collect();
        }
        Ok(tuples
            .into_iter()
            .map(|residues| Self {
                levels: levels.to_vec(),
                residues,
            })
            .collect())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn gcd128(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd128(b, a % b)
    }
}

// ---------------------------------------------------------------------------
// Finite groupoids

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arrow {
    pub source: usize,
    pub target: usize,
}

/// Objects `0..objects`, arrows with source and target, and a composition
/// table where `compose[f][g] = f ∘ g` is defined when `target(g) = source(f)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroupoid {
    pub objects: usize,
    pub arrows: Vec<Arrow>,
    pub compose: Vec<Vec<Option<usize>>>,
}

impl FiniteGroupoid {
    pub fn new(
        objects: usize,
        arrows: Vec<Arrow>,
        compose: Vec<Vec<Option<usize>>>,
    ) -> Result<Self, ProfiniteError> {
        let c = Self {
            objects,
            arrows,
            compose,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn hom(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.arrows.len())
            .filter(|&f| self.arrows[f] == Arrow { source: a, target: b })
            .collect()
    }

    pub fn comp(&self, f: usize, g: usize) -> Option<usize> {
        self.compose[f][g]
    }

    pub fn id(&self, a: usize) -> usize {
        self.hom(a, a)
            .into_iter()
            .find(|&e| {
                (0..self.arrows.len()).all(|f| {
                    (self.arrows[f].source != a || self.comp(f, e) == Some(f))
                        && (self.arrows[f].target != a || self.comp(e, f) == Some(f))
                })
            })
            .expect("validated groupoid")
    }

    pub fn inv(&self, f: usize) -> usize {
        let Arrow { source, target } = self.arrows[f];
        let e = self.id(source);
        self.hom(target, source)
            .into_iter()
            .find(|&g| self.comp(g, f) == Some(e))
            .expect("validated groupoid")
    }

    /// Checks typing, associativity, units and inverses exhaustively.
    pub fn validate(&self) -> Result<(), ProfiniteError> {
        let n = self.arrows.len();
        let bad = |s: String| Err(ProfiniteError::InvalidGroupoid(s));
        if self.compose.len() != n || self.compose.iter().any(|r| r.len() != n) {
            return bad("composition table is not square".into());
        }
        if self.arrows.iter().any(|a| a.source >= self.objects || a.target >= self.objects) {
            return bad("arrow endpoint out of range".into());
        }
        for (f, g) in (0..n).cartesian_product(0..n) {
            let (af, ag) = (self.arrows[f], self.arrows[g]);
            match self.compose[f][g] {
                None if ag.target == af.source => return bad(format!("{f} ∘ {g} is missing")),
                Some(_) if ag.target != af.source => return bad(format!("{f} ∘ {g} is not composable")),
                Some(h) if h >= n || self.arrows[h] != (Arrow { source: ag.source, target: af.target }) => {
                    return bad(format!("{f} ∘ {g} has the wrong type"))
                }
                _ => {}
            }
        }
        for (f, g, h) in (0..n).cartesian_product(0..n).cartesian_product(0..n).map(|((f, g), h)| (f, g, h)) {
            if let (Some(fg), Some(gh)) = (self.comp(f, g), self.comp(g, h)) {
                if self.comp(fg, h) != self.comp(f, gh) {
                    return bad(format!("({f}∘{g})∘{h} ≠ {f}∘({g}∘{h})"));
                }
            }
        }
        for a in 0..self.objects {
            let unit = self.hom(a, a).into_iter().find(|&e| {
                (0..n).all(|f| {
                    (self.arrows[f].source != a || self.comp(f, e) == Some(f))
                        && (self.arrows[f].target != a || self.comp(e, f) == Some(f))
                })
            });
            let Some(e) = unit else {
                return bad(format!("object {a} has no identity"));
            };
            for f in (0..n).filter(|&f| self.arrows[f].source == a) {
                let t = self.arrows[f].target;
                let e_t = self.hom(t, t).into_iter().find(|&u| self.comp(u, f) == Some(f));
                let has_inv = self.hom(t, a).into_iter().any(|g| {
                    self.comp(g, f) == Some(e) && Some(self.comp(f, g).unwrap()) == e_t
                });
                if !has_inv {
                    return bad(format!("arrow {f} has no inverse"));
                }
            }
        }
        Ok(())
    }

    /// A group as a one-object groupoid.
    pub fn from_group(g: &FiniteGroup) -> Self {
        Self::connected(1, g)
    }

    /// `n` objects, `Hom(i, j) = G` for all `i, j`. Arrow `(i, j, x)` has
    /// index `(i·n + j)·|G| + x` and `(j, k, y) ∘ (i, j, x) = (i, k, y·x)`.
    pub fn connected(n: usize, g: &FiniteGroup) -> Self {
        let m = g.order();
        let arrows: Vec<Arrow> = (0..n * n * m)
            .map(|k| Arrow {
                source: k / m / n,
                target: k / m % n,
            })
            .collect();
        let compose = (0..arrows.len())
            .map(|f| {
                (0..arrows.len())
                    .map(|h| {
                        let (af, ah) = (arrows[f], arrows[h]);
                        (ah.target == af.source)
                            .then(|| (ah.source * n + af.target) * m + g.mul(f % m, h % m))
                    })
                    .collect()
            })
            .collect();
        Self {
            objects: n,
            arrows,
            compose,
        }
    }

    /// `𝐂 × 𝐃`: object `(c, d)` is `c·|D| + d`, arrow `(f, g)` is `f·|D₁| + g`.
    pub fn product(&self, other: &Self) -> Self {
        let (no, na) = (other.objects, other.arrows.len());
        let arrows: Vec<Arrow> = self
            .arrows
            .iter()
            .cartesian_product(&other.arrows)
            .map(|(a, b)| Arrow {
                source: a.source * no + b.source,
                target: a.target * no + b.target,
            })
            .collect();
        let compose = (0..arrows.len())
            .map(|f| {
                (0..arrows.len())
                    .map(|h| {
                        let x = self.comp(f / na, h / na)?;
                        let y = other.comp(f % na, h % na)?;
                        Some(x * na + y)
                    })
                    .collect()
            })
            .collect();
        Self {
            objects: self.objects * no,
            arrows,
            compose,
        }
    }
}

/// A functor between finite groupoids, by its action on objects and arrows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Functor {
    pub objects: Vec<usize>,
    pub arrows: Vec<usize>,
}

impl Functor {
    pub fn identity(c: &FiniteGroupoid) -> Self {
        Self {
            objects: (0..c.objects).collect(),
            arrows: (0..c.arrows.len()).collect(),
        }
    }

    pub fn validate(&self, c: &FiniteGroupoid, d: &FiniteGroupoid) -> Result<(), ProfiniteError> {
        let bad = |s: String| Err(ProfiniteError::InvalidFunctor(s));
        if self.objects.len() != c.objects || self.arrows.len() != c.arrows.len() {
            return bad("functor has the wrong shape".into());
        }
        if self.objects.iter().any(|&x| x >= d.objects) || self.arrows.iter().any(|&x| x >= d.arrows.len()) {
            return bad("image out of range".into());
        }
        for (f, a) in c.arrows.iter().enumerate() {
            let want = Arrow {
                source: self.objects[a.source],
                target: self.objects[a.target],
            };
            if d.arrows[self.arrows[f]] != want {
                return bad(format!("arrow {f} is sent to an arrow of the wrong type"));
            }
        }
        for (f, g) in (0..c.arrows.len()).cartesian_product(0..c.arrows.len()) {
            if let Some(fg) = c.comp(f, g) {
                if d.comp(self.arrows[f], self.arrows[g]) != Some(self.arrows[fg]) {
                    return bad(format!("composite {f} ∘ {g} is not preserved"));
                }
            }
        }
        for a in 0..c.objects {
            if self.arrows[c.id(a)] != d.id(self.objects[a]) {
                return bad(format!("identity of {a} is not preserved"));
            }
        }
        Ok(())
    }

    /// Bijective on every hom-set.
    pub fn is_fully_faithful(&self, c: &FiniteGroupoid, d: &FiniteGroupoid) -> bool {
        (0..c.objects).cartesian_product(0..c.objects).all(|(a, b)| {
            let image: BTreeSet<usize> = c.hom(a, b).iter().map(|&f| self.arrows[f]).collect();
            let want = d.hom(self.objects[a], self.objects[b]);
            image.len() == c.hom(a, b).len() && image.into_iter().eq(want)
        })
    }

    /// Every object of the target is isomorphic to an image object.
    pub fn is_essentially_surjective(&self, d: &FiniteGroupoid) -> bool {
        (0..d.objects).all(|y| self.objects.iter().any(|&x| !d.hom(x, y).is_empty()))
    }

    pub fn is_isomorphism(&self, c: &FiniteGroupoid, d: &FiniteGroupoid) -> bool {
        let objs: BTreeSet<_> = self.objects.iter().collect();
        let arrs: BTreeSet<_> = self.arrows.iter().collect();
        objs.len() == d.objects && arrs.len() == d.arrows.len() && self.objects.len() == c.objects
    }
}

/// Fully faithful and essentially surjective; false for invalid functors.
pub fn groupoid_equivalence(f: &Functor, c: &FiniteGroupoid, d: &FiniteGroupoid) -> bool {
    f.validate(c, d).is_ok() && f.is_fully_faithful(c, d) && f.is_essentially_surjective(d)
}

pub fn groupoid_product(c: &FiniteGroupoid, d: &FiniteGroupoid) -> FiniteGroupoid {
    c.product(d)
}

/// Completion of a finite groupoid: the identity, every quotient of a finite
/// hom-group being finite already.
pub fn completion(c: &FiniteGroupoid) -> (FiniteGroupoid, Functor) {
    (c.clone(), Functor::identity(c))
}

/// The projections `𝐂 × 𝐃 → 𝐂` and `𝐂 × 𝐃 → 𝐃`.
pub fn projections(c: &FiniteGroupoid, d: &FiniteGroupoid) -> (Functor, Functor) {
    let (no, na) = (d.objects, d.arrows.len());
    let p = c.product(d);
    let first = Functor {
        objects: (0..p.objects).map(|x| x / no).collect(),
        arrows: (0..p.arrows.len()).map(|f| f / na).collect(),
    };
    let second = Functor {
        objects: (0..p.objects).map(|x| x % no).collect(),
        arrows: (0..p.arrows.len()).map(|f| f % na).collect(),
    };
    (first, second)
}

/// Checks that the map `(𝐂 × 𝐃)^ → Ĉ × D̂` induced by the completed
/// projections is an isomorphism of groupoids.
pub fn product_completion_check(c: &FiniteGroupoid, d: &FiniteGroupoid) -> bool {
    let (cd, unit_cd) = completion(&c.product(d));
    let (ch, unit_c) = completion(c);
    let (dh, unit_d) = completion(d);
    let target = ch.product(&dh);
    let (p1, p2) = projections(c, d);
    // Completed projections: unit ∘ p on the finite product, read through the
    // completion of the source.
    let (no, na) = (dh.objects, dh.arrows.len());
    let pairing = Functor {
        objects: (0..cd.objects)
            .map(|x| unit_c.objects[p1.objects[unit_cd.objects[x]]] * no + unit_d.objects[p2.objects[unit_cd.objects[x]]])
            .collect(),
        arrows: (0..cd.arrows.len())
            .map(|f| unit_c.arrows[p1.arrows[unit_cd.arrows[f]]] * na + unit_d.arrows[p2.arrows[unit_cd.arrows[f]]])
            .collect(),
    };
    pairing.validate(&cd, &target).is_ok()
        && pairing.is_isomorphism(&cd, &target)
        && groupoid_equivalence(&pairing, &cd, &target)
}
