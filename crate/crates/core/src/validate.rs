//! Exhaustive axiom checks for finite modular operads.

use std::rc::Rc;

use itertools::Itertools;
use serde::Serialize;

use crate::operad::{comp_profile, contract_profile, profiles, Colour, Elem, ModularOperad};

#[derive(Clone, Debug)]
pub struct ValidateOptions {
    /// Largest arity of the operands checked; capped by the operad's own.
    pub max_arity: usize,
    /// Permutations of at most this many points are checked exhaustively;
    /// longer ones through adjacent transpositions.
    pub full_perm_arity: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            max_arity: 4,
            full_perm_arity: 3,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AxiomFailure {
    pub axiom: String,
    pub instance: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub instances_checked: usize,
    /// First failing instance per axiom family.
    pub failures: Vec<AxiomFailure>,
}

pub const AXIOMS: &[&str] = &[
    "signature",
    "sigma-functoriality",
    "unit",
    "associativity-sequential",
    "associativity-parallel",
    "equivariance-comp",
    "equivariance-contract",
    "contract-order",
    "interchange-two-edges",
    "interchange-contract-compose",
];

struct Checker<'a> {
    p: &'a dyn ModularOperad,
    full_perm_arity: usize,
    report: ValidationReport,
    /// (genus, profile) pairs with nonempty entries.
    shapes: Vec<(u32, Vec<Colour>)>,
    partner_cache: Vec<Rc<Partners>>,
    /// Largest arity of a checked result.
    bound: usize,
}

type Partners = Vec<((u32, Vec<Colour>, Elem), usize)>;

type Value = Option<(u32, Vec<Colour>, Elem)>;

impl Checker<'_> {
    fn fail(&mut self, axiom: &str, instance: String) {
        if !self.report.failures.iter().any(|f| f.axiom == axiom) {
            self.report.failures.push(AxiomFailure {
                axiom: axiom.to_string(),
                instance,
            });
        }
    }

    fn failed(&self, axiom: &str) -> bool {
        self.report.failures.iter().any(|f| f.axiom == axiom)
    }

    fn justified(&self, g: u32, len: usize) -> bool {
        len > self.p.max_arity() || g > self.p.max_genus().unwrap_or(0)
    }

    fn comp(&mut self, a: &(u32, Vec<Colour>, Elem), i: usize, b: &(u32, Vec<Colour>, Elem), j: usize) -> Value {
        let (g1, c, x) = a;
        let (g2, d, y) = b;
        let out = comp_profile(c, i, d, j);
        let g = self.p.comp_genus(*g1, *g2);
        match self.p.compose(*g1, c, i, *x, *g2, d, j, *y) {
            Some(z) => {
                if z >= self.p.entry_count(g, &out) {
                    self.fail("signature", format!("∘ at {c:?},{i} / {d:?},{j} leaves its target"));
                    return None;
                }
                Some((g, out, z))
            }
            None => {
                if !self.justified(g, out.len()) {
                    self.fail("signature", format!("∘ undefined at {c:?},{i} / {d:?},{j}"));
                }
                None
            }
        }
    }

    fn xi(&mut self, a: &(u32, Vec<Colour>, Elem), i: usize, j: usize) -> Value {
        let (g, c, x) = a;
        let (i, j) = (i.min(j), i.max(j));
        let out = contract_profile(c, i, j);
        let go = self.p.contract_genus(*g);
        match self.p.contract(*g, c, i, j, *x) {
            Some(z) => {
                if z >= self.p.entry_count(go, &out) {
                    self.fail("signature", format!("ξ at {c:?},{i},{j} leaves its target"));
                    return None;
                }
                Some((go, out, z))
            }
            None => {
                if self.p.has_contractions() && !self.justified(go, out.len()) {
                    self.fail("signature", format!("ξ undefined at {c:?},{i},{j}"));
                }
                None
            }
        }
    }

    fn act(&self, a: &(u32, Vec<Colour>, Elem), perm: &[usize]) -> (u32, Vec<Colour>, Elem) {
        let (g, c, x) = a;
        let d: Vec<Colour> = perm.iter().map(|&k| c[k]).collect();
        (*g, d, self.p.act(*g, c, perm, *x))
    }

    fn agree(&mut self, axiom: &str, l: Value, r: Value, what: impl FnOnce() -> String) {
        // An undefined side has already been justified by truncation (or
        // reported under `signature`), so only total instances are compared.
        let (Some(a), Some(b)) = (l, r) else { return };
        self.report.instances_checked += 1;
        if a != b {
            self.fail(axiom, format!("{}: {a:?} ≠ {b:?}", what()));
        }
    }

    fn perms(&self, n: usize) -> Vec<Vec<usize>> {
        if n <= self.full_perm_arity {
            (0..n).permutations(n).collect()
        } else {
            (0..n.saturating_sub(1))
                .map(|k| {
                    let mut p: Vec<usize> = (0..n).collect();
                    p.swap(k, k + 1);
                    p
                })
                .collect()
        }
    }

    fn elements(&self) -> Vec<(u32, Vec<Colour>, Elem)> {
        self.shapes
            .iter()
            .flat_map(|(g, c)| (0..self.p.entry_count(*g, c)).map(move |x| (*g, c.clone(), x)))
            .collect()
    }

    fn sigma(&mut self) {
        for a in self.elements() {
            let n = a.1.len();
            let id: Vec<usize> = (0..n).collect();
            let r = self.act(&a, &id);
            self.agree("sigma-functoriality", Some(r), Some(a.clone()), || {
                format!("identity on {a:?}")
            });
            let gens: Vec<Vec<usize>> = (0..n.saturating_sub(1))
                .map(|k| {
                    let mut p = id.clone();
                    p.swap(k, k + 1);
                    p
                })
                .collect();
            for p in self.perms(n) {
                let ap = self.act(&a, &p);
                for q in &gens {
                    let pq: Vec<usize> = q.iter().map(|&k| p[k]).collect();
                    let l = self.act(&ap, q);
                    let r = self.act(&a, &pq);
                    self.agree("sigma-functoriality", Some(l), Some(r), || {
                        format!("{a:?} by {p:?} then {q:?}")
                    });
                }
            }
        }
    }

    fn units(&mut self) {
        for a in self.elements() {
            let c = a.1.clone();
            let n = c.len();
            for i in 0..n {
                let ci = c[i];
                let id = (0, vec![self.p.dagger(ci), ci], self.p.unit(ci));
                let mut to_end: Vec<usize> = (0..n).filter(|&k| k != i).collect();
                to_end.push(i);
                let l = self.comp(&a, i, &id, 0);
                let r = Some(self.act(&a, &to_end));
                self.agree("unit", l, r, || format!("{a:?} ∘_{i},0 id"));
                let di = self.p.dagger(ci);
                let id2 = (0, vec![self.p.dagger(di), di], self.p.unit(di));
                let mut to_front = vec![i];
                to_front.extend((0..n).filter(|&k| k != i));
                let l = self.comp(&id2, 1, &a, i);
                let r = Some(self.act(&a, &to_front));
                self.agree("unit", l, r, || format!("id ∘_1,{i} {a:?}"));
            }
        }
    }

    /// Elements whose profile has `d[j] = c[i]†`.
    fn partners(&self, col: Colour) -> Rc<Partners> {
        self.partner_cache[col].clone()
    }

    fn build_partners(&mut self) {
        self.partner_cache = (0..self.p.colour_count())
            .map(|c| Rc::new(self.compute_partners(c)))
            .collect();
    }

    fn compute_partners(&self, col: Colour) -> Partners {
        let want = self.p.dagger(col);
        self.elements()
            .into_iter()
            .flat_map(|b| {
                let pos: Vec<usize> = (0..b.1.len()).filter(|&j| b.1[j] == want).collect();
                pos.into_iter().map(move |j| (b.clone(), j))
            })
            .collect()
    }

    fn associativity(&mut self) {
        let elems = self.elements();
        for a in &elems {
            let n = a.1.len();
            for i in 0..n {
                for (b, j) in self.partners(a.1[i]).iter() {
                    let (b, j) = (b.clone(), *j);
                    let m = b.1.len();
                    if n + m > self.bound + 3 {
                        continue;
                    }
                    let ab = self.comp(a, i, &b, j);
                    // Sequential: z attached to y.
                    for k in (0..m).filter(|&k| k != j) {
                        for (c, l) in self.partners(b.1[k]).iter() {
                            let l = *l;
                            if self.failed("associativity-sequential") {
                                break;
                            }
                            if n + m + c.1.len() > self.bound + 4 {
                                continue;
                            }
                            let kk = (n - 1) + k - usize::from(k > j);
                            let lhs = ab.clone().and_then(|ab| self.comp(&ab, kk, c, l));
                            let jj = j - usize::from(j > k);
                            let bc = self.comp(&b, k, c, l);
                            let rhs = bc.and_then(|bc| self.comp(a, i, &bc, jj));
                            self.agree("associativity-sequential", lhs, rhs, || {
                                format!("({a:?}∘_{i},{j}{b:?})∘_{kk},{l}{c:?}")
                            });
                        }
                    }
                    // Parallel: z attached to x.
                    for k in (0..n).filter(|&k| k != i) {
                        for (c, l) in self.partners(a.1[k]).iter() {
                            let l = *l;
                            if self.failed("associativity-parallel") {
                                break;
                            }
                            if n + m + c.1.len() > self.bound + 4 {
                                continue;
                            }
                            let kk = k - usize::from(k > i);
                            let lhs = ab.clone().and_then(|ab| self.comp(&ab, kk, c, l));
                            let ii = i - usize::from(i > k);
                            let ac = self.comp(a, k, c, l);
                            let rhs = ac.and_then(|ac| self.comp(&ac, ii, &b, j));
                            let (aa, bb, cc) = (n - 2, m - 1, c.1.len() - 1);
                            let p: Vec<usize> = (0..aa + bb + cc)
                                .map(|t| {
                                    if t < aa {
                                        t
                                    } else if t < aa + bb {
                                        t + cc
                                    } else {
                                        t - bb
                                    }
                                })
                                .collect();
                            let rhs = rhs.map(|r| self.act(&r, &p));
                            self.agree("associativity-parallel", lhs, rhs, || {
                                format!("{a:?} with {b:?} at {i},{j} and {c:?} at {k},{l}")
                            });
                        }
                    }
                }
            }
        }
    }

    fn equivariance(&mut self) {
        let elems = self.elements();
        for a in &elems {
            let n = a.1.len();
            for p in self.perms(n) {
                let ap = self.act(a, &p);
                // ∘ on the left operand.
                for ii in 0..n {
                    let i = p[ii];
                    for (b, j) in self.partners(ap.1[ii]).iter() {
                        let (b, j) = (b.clone(), *j);
                        if self.failed("equivariance-comp") {
                            break;
                        }
                        let m = b.1.len();
                        let r = |x: usize| x - usize::from(x > i);
                        let big: Vec<usize> = (0..n - 1 + m - 1)
                            .map(|k| {
                                if k < n - 1 {
                                    r(p[k + usize::from(k >= ii)])
                                } else {
                                    k
                                }
                            })
                            .collect();
                        let lhs = self.comp(&ap, ii, &b, j);
                        let rhs = self.comp(a, i, &b, j).map(|v| self.act(&v, &big));
                        self.agree("equivariance-comp", lhs, rhs, || {
                            format!("{a:?} by {p:?} ∘_{ii},{j} {b:?}")
                        });
                    }
                }
                // ∘ on the right operand: y = a permuted, x any partner.
                for jj in 0..n {
                    let j = p[jj];
                    for (b, i) in self.partners(ap.1[jj]).iter() {
                        let (b, i) = (b.clone(), *i);
                        if self.failed("equivariance-comp") {
                            break;
                        }
                        let m = b.1.len();
                        let s = |x: usize| x - usize::from(x > j);
                        let big: Vec<usize> = (0..m - 1 + n - 1)
                            .map(|k| {
                                if k < m - 1 {
                                    k
                                } else {
                                    let l = k - (m - 1);
                                    (m - 1) + s(p[l + usize::from(l >= jj)])
                                }
                            })
                            .collect();
                        let lhs = self.comp(&b, i, &ap, jj);
                        let rhs = self.comp(&b, i, a, j).map(|v| self.act(&v, &big));
                        self.agree("equivariance-comp", lhs, rhs, || {
                            format!("{b:?} ∘_{i},{jj} {a:?} by {p:?}")
                        });
                    }
                }
                // ξ.
                if !self.p.has_contractions() {
                    continue;
                }
                for (ii, jj) in (0..n).tuple_combinations() {
                    if ap.1[ii] != self.p.dagger(ap.1[jj]) || self.failed("equivariance-contract") {
                        continue;
                    }
                    let (x, y) = (p[ii].min(p[jj]), p[ii].max(p[jj]));
                    let rest: Vec<usize> = (0..n).filter(|&k| k != ii && k != jj).collect();
                    let shift = |m: usize| m - usize::from(m > x) - usize::from(m > y);
                    let big: Vec<usize> = rest.iter().map(|&k| shift(p[k])).collect();
                    let lhs = self.xi(&ap, ii, jj);
                    let rhs = self.xi(a, x, y).map(|v| self.act(&v, &big));
                    self.agree("equivariance-contract", lhs, rhs, || {
                        format!("ξ_{ii},{jj} of {a:?} by {p:?}")
                    });
                }
            }
        }
    }

    fn contractions(&mut self) {
        if !self.p.has_contractions() {
            return;
        }
        for a in self.elements() {
            let c = a.1.clone();
            let n = c.len();
            let pairs: Vec<(usize, usize)> = (0..n)
                .tuple_combinations()
                .filter(|&(i, j)| c[i] == self.p.dagger(c[j]))
                .collect();
            for &(i, j) in &pairs {
                for &(k, l) in &pairs {
                    if [i, j].contains(&k) || [i, j].contains(&l) || (i, j) >= (k, l) {
                        continue;
                    }
                    let s1 = |m: usize| m - usize::from(m > i) - usize::from(m > j);
                    let s2 = |m: usize| m - usize::from(m > k) - usize::from(m > l);
                    let lhs = self.xi(&a, i, j).and_then(|v| self.xi(&v, s1(k), s1(l)));
                    let rhs = self.xi(&a, k, l).and_then(|v| self.xi(&v, s2(i), s2(j)));
                    self.agree("contract-order", lhs, rhs, || {
                        format!("{a:?} at {i},{j} and {k},{l}")
                    });
                }
            }
        }
    }

    fn interchange(&mut self) {
        if !self.p.has_contractions() {
            return;
        }
        let elems = self.elements();
        for a in &elems {
            let n = a.1.len();
            for i in 0..n {
                for (b, j) in self.partners(a.1[i]).iter() {
                    let (b, j) = (b.clone(), *j);
                    let m = b.1.len();
                    if n + m > self.bound + 2 {
                        continue;
                    }
                    // Two edges between x and y, glued in either order.
                    for k in (0..n).filter(|&k| k != i) {
                        for l in (0..m).filter(|&l| l != j) {
                            if a.1[k] != self.p.dagger(b.1[l])
                                || self.failed("interchange-two-edges")
                            {
                                continue;
                            }
                            let x1 = k - usize::from(k > i);
                            let y1 = (n - 1) + l - usize::from(l > j);
                            let lhs = self.comp(a, i, &b, j).and_then(|v| self.xi(&v, x1, y1));
                            let x2 = i - usize::from(i > k);
                            let y2 = (n - 1) + j - usize::from(j > l);
                            let rhs = self.comp(a, k, &b, l).and_then(|v| self.xi(&v, x2, y2));
                            self.agree("interchange-two-edges", lhs, rhs, || {
                                format!("{a:?},{b:?} along ({i},{j}) and ({k},{l})")
                            });
                        }
                    }
                    // A loop on x, contracted before or after composing.
                    for (k, l) in (0..n).tuple_combinations() {
                        if k == i || l == i || a.1[k] != self.p.dagger(a.1[l]) {
                            continue;
                        }
                        if self.failed("interchange-contract-compose") {
                            continue;
                        }
                        let ii = i - usize::from(i > k) - usize::from(i > l);
                        let lhs = self.xi(a, k, l).and_then(|v| self.comp(&v, ii, &b, j));
                        let kk = k - usize::from(k > i);
                        let ll = l - usize::from(l > i);
                        let rhs = self.comp(a, i, &b, j).and_then(|v| self.xi(&v, kk, ll));
                        self.agree("interchange-contract-compose", lhs, rhs, || {
                            format!("ξ_{k},{l}{a:?} ∘_{ii},{j} {b:?}")
                        });
                    }
                }
            }
        }
    }
}

/// Checks Σ-functoriality, units, both associativity shapes, equivariance
/// of ∘ and ξ, order independence of ξξ and the ∘/ξ interchanges.
pub fn validate_modular_operad(p: &dyn ModularOperad, opts: &ValidateOptions) -> ValidationReport {
    let arity = opts.max_arity.min(p.max_arity());
    let shapes: Vec<(u32, Vec<Colour>)> = p
        .genus_range()
        .flat_map(|g| {
            (0..=arity).flat_map(move |n| profiles(p.colour_count(), n).into_iter().map(move |c| (g, c)))
        })
        .filter(|(g, c)| p.entry_count(*g, c) > 0)
        .collect();
    let mut ch = Checker {
        p,
        full_perm_arity: opts.full_perm_arity,
        report: ValidationReport::default(),
        shapes,
        partner_cache: Vec::new(),
        bound: arity,
    };
    ch.build_partners();
    for c in 0..p.colour_count() {
        if p.dagger(p.dagger(c)) != c {
            ch.fail("signature", format!("dagger is not an involution at colour {c}"));
        }
        if p.unit(c) >= p.entry_count(0, &[p.dagger(c), c]) {
            ch.fail("signature", format!("unit of colour {c} missing"));
        }
    }
    ch.sigma();
    ch.units();
    ch.associativity();
    ch.equivariance();
    ch.contractions();
    ch.interchange();
    ch.report.valid = ch.report.failures.is_empty();
    let mut failures = std::mem::take(&mut ch.report.failures);
    failures.sort_by_key(|f| AXIOMS.iter().position(|a| *a == f.axiom));
    ch.report.failures = failures;
    ch.report
}
