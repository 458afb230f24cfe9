//! Finite groups given by multiplication tables, probability measures on them,
//! subgroup and coset machinery, characters of abelian groups and convolution.
//!
//! Elements are dense indices `0..order`; index 0 is always the identity. The
//! element ordering fixed at construction is the row/column ordering of every
//! matrix built from the group (regular representations, correlation matrices,
//! channels).

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{c, C64};

/// Largest order accepted for explicit tables.
pub const MAX_EXPLICIT_ORDER: usize = 64;
/// Largest n accepted for `symmetric(n)`.
pub const MAX_SYMMETRIC_DEGREE: usize = 5;

/// Normalization tolerance for probability measures.
pub const MEASURE_TOL: f64 = 1e-12;
/// Measures deviating from total mass 1 by less than this are renormalized.
pub const MEASURE_RENORM_TOL: f64 = 1e-9;

/// How a group was built. Drives the irrep catalog and the character ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    Cyclic(usize),
    Dihedral(usize),
    Symmetric(usize),
    Product(Box<Family>, Box<Family>),
    Semidirect,
    Explicit,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Cyclic(n) => write!(f, "cyclic({n})"),
            Family::Dihedral(n) => write!(f, "dihedral({n})"),
            Family::Symmetric(n) => write!(f, "symmetric({n})"),
            Family::Product(a, b) => write!(f, "product({a},{b})"),
            Family::Semidirect => write!(f, "semidirect"),
            Family::Explicit => write!(f, "explicit"),
        }
    }
}

impl Family {
    /// Parses the `Display` form back.
    pub fn parse(s: &str) -> Option<Family> {
        let s = s.trim();
        if s == "semidirect" {
            return Some(Family::Semidirect);
        }
        if s == "explicit" {
            return Some(Family::Explicit);
        }
        let open = s.find('(')?;
        if !s.ends_with(')') {
            return None;
        }
        let head = &s[..open];
        let inner = &s[open + 1..s.len() - 1];
        match head {
            "cyclic" => inner.parse().ok().map(Family::Cyclic),
            "dihedral" => inner.parse().ok().map(Family::Dihedral),
            "symmetric" => inner.parse().ok().map(Family::Symmetric),
            "product" => {
                // split at the top-level comma
                let mut depth = 0i32;
                for (i, ch) in inner.char_indices() {
                    match ch {
                        '(' => depth += 1,
                        ')' => depth -= 1,
                        ',' if depth == 0 => {
                            let a = Family::parse(&inner[..i])?;
                            let b = Family::parse(&inner[i + 1..])?;
                            return Some(Family::Product(Box::new(a), Box::new(b)));
                        }
                        _ => {}
                    }
                }
                None
            }
            _ => None,
        }
    }
}

/// Action of the acting group on the normal subgroup in a semidirect product.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// For `N = K × K` and `|H| = 2`: the non-identity element swaps coordinates.
    Swap,
    /// `table[h][n]` is the image of `n` under the automorphism attached to `h`.
    Table(Vec<Vec<usize>>),
}

/// Recipe for building a group.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupDescriptor {
    Cyclic(usize),
    Product(Box<GroupDescriptor>, Box<GroupDescriptor>),
    Semidirect {
        normal: Box<GroupDescriptor>,
        acting: Box<GroupDescriptor>,
        action: Action,
    },
    Symmetric(usize),
    Dihedral(usize),
    Explicit {
        table: Vec<Vec<usize>>,
        labels: Option<Vec<String>>,
    },
}

impl GroupDescriptor {
    /// The `(Z₂×Z₂)⋊Z₂` construction with the swap action (isomorphic to D₄).
    pub fn d4_semidirect() -> Self {
        GroupDescriptor::Semidirect {
            normal: Box::new(GroupDescriptor::Product(
                Box::new(GroupDescriptor::Cyclic(2)),
                Box::new(GroupDescriptor::Cyclic(2)),
            )),
            acting: Box::new(GroupDescriptor::Cyclic(2)),
            action: Action::Swap,
        }
    }

    /// Parses a built-in alias: `z{n}`, `z2^{n}`, `z{a}xz{b}...`, `s{n}`,
    /// `d{n}`, `d4-semidirect`.
    pub fn from_alias(alias: &str) -> Result<Self> {
        let a = alias.trim().to_ascii_lowercase();
        let bad = || Error::UnsupportedDescriptor(alias.to_string());
        if a == "d4-semidirect" {
            return Ok(Self::d4_semidirect());
        }
        if a.contains('x') {
            let mut parts = a.split('x').map(Self::from_alias);
            let first = parts.next().ok_or_else(bad)??;
            return parts.try_fold(first, |acc, p| {
                Ok(GroupDescriptor::Product(Box::new(acc), Box::new(p?)))
            });
        }
        if let Some(rest) = a.strip_prefix("z2^") {
            let n: usize = rest.parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            let mut d = GroupDescriptor::Cyclic(2);
            for _ in 1..n {
                d = GroupDescriptor::Product(Box::new(d), Box::new(GroupDescriptor::Cyclic(2)));
            }
            return Ok(d);
        }
        let (head, num) = a.split_at(1);
        let n: usize = num.parse().map_err(|_| bad())?;
        match head {
            "z" => Ok(GroupDescriptor::Cyclic(n)),
            "s" => Ok(GroupDescriptor::Symmetric(n)),
            "d" => Ok(GroupDescriptor::Dihedral(n)),
            _ => Err(bad()),
        }
    }
}

/// A validated finite group.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
    labels: Vec<String>,
    family: Family,
    /// When present, element index is the mixed-radix encoding of an exponent
    /// vector over cyclic factors of these orders.
    cyclic_factors: Option<Vec<usize>>,
}

impl FiniteGroup {
    /// Builds a group from a descriptor (`make_group`).
    pub fn build(desc: &GroupDescriptor) -> Result<Self> {
        match desc {
            GroupDescriptor::Cyclic(n) => cyclic(*n),
            GroupDescriptor::Product(a, b) => {
                let ga = Self::build(a)?;
                let gb = Self::build(b)?;
                Ok(product(&ga, &gb))
            }
            GroupDescriptor::Semidirect { normal, acting, action } => {
                let n = Self::build(normal)?;
                let h = Self::build(acting)?;
                semidirect(&n, &h, action)
            }
            GroupDescriptor::Symmetric(n) => symmetric(*n),
            GroupDescriptor::Dihedral(n) => dihedral(*n),
            GroupDescriptor::Explicit { table, labels } => {
                if table.len() > MAX_EXPLICIT_ORDER {
                    return Err(Error::UnsupportedDescriptor(format!(
                        "explicit table of order {} exceeds {MAX_EXPLICIT_ORDER}",
                        table.len()
                    )));
                }
                Self::from_table(table.clone(), labels.clone(), Family::Explicit, None)
            }
        }
    }

    /// Validates a multiplication table and relabels so that the identity is
    /// element 0.
    pub fn from_table(
        table: Vec<Vec<usize>>,
        labels: Option<Vec<String>>,
        family: Family,
        cyclic_factors: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::UnsupportedDescriptor("empty table".into()));
        }
        if table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(Error::UnsupportedDescriptor("table is not n×n over 0..n".into()));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::UnsupportedDescriptor("label count differs from order".into()));
            }
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|s| table[e][s] == s && table[s][e] == s))
            .ok_or(Error::NoIdentity)?;
        let mut inverse = vec![0; n];
        for s in 0..n {
            inverse[s] = (0..n)
                .find(|&t| table[s][t] == e && table[t][s] == e)
                .ok_or(Error::NoInverse(s))?;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for cc in 0..n {
                    if table[ab][cc] != table[a][table[b][cc]] {
                        return Err(Error::NonAssociativeTable(a, b, cc));
                    }
                }
            }
        }
        let mut labels = labels.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
        let (table, inverse, cyclic_factors) = if e == 0 {
            (table, inverse, cyclic_factors)
        } else {
            // swap e and 0
            let p = |x: usize| if x == e { 0 } else if x == 0 { e } else { x };
            let mut t2 = vec![vec![0; n]; n];
            for a in 0..n {
                for b in 0..n {
                    t2[p(a)][p(b)] = p(table[a][b]);
                }
            }
            let mut inv2 = vec![0; n];
            for a in 0..n {
                inv2[p(a)] = p(inverse[a]);
            }
            labels.swap(0, e);
            (t2, inv2, None)
        };
        Ok(FiniteGroup {
            order: n,
            table,
            identity: 0,
            inverse,
            labels,
            family,
            cyclic_factors,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }
    pub fn identity(&self) -> usize {
        self.identity
    }
    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn family(&self) -> &Family {
        &self.family
    }
    pub fn cyclic_factors(&self) -> Option<&[usize]> {
        self.cyclic_factors.as_deref()
    }

    #[inline]
    pub fn mul(&self, s: usize, t: usize) -> usize {
        self.table[s][t]
    }
    #[inline]
    pub fn inv(&self, s: usize) -> usize {
        self.inverse[s]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.table[a][b] == self.table[b][a]))
    }

    pub fn element_order(&self, s: usize) -> usize {
        let mut x = s;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, s);
            k += 1;
        }
        k
    }

    /// Index of the element with the given label.
    pub fn find_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Exhaustive check of associativity, identity and inverses.
    pub fn check_axioms(&self) -> Result<()> {
        let n = self.order;
        for s in 0..n {
            if self.mul(0, s) != s || self.mul(s, 0) != s {
                return Err(Error::NoIdentity);
            }
            if self.mul(s, self.inv(s)) != 0 || self.mul(self.inv(s), s) != 0 {
                return Err(Error::NoInverse(s));
            }
            if self.inv(self.inv(s)) != s {
                return Err(Error::NoInverse(s));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    if self.mul(self.mul(a, b), cc) != self.mul(a, self.mul(b, cc)) {
                        return Err(Error::NonAssociativeTable(a, b, cc));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_elements(&self, set: &[usize]) -> Result<()> {
        if let Some(&bad) = set.iter().find(|&&s| s >= self.order) {
            return Err(Error::UnsupportedDescriptor(format!("element {bad} out of range")));
        }
        Ok(())
    }

    /// Smallest subgroup containing `gens`, sorted ascending.
    pub fn subgroup_generated(&self, gens: &[usize]) -> Result<Vec<usize>> {
        if gens.is_empty() {
            return Err(Error::EmptyGeneratorSet);
        }
        self.check_elements(gens)?;
        let mut set: BTreeSet<usize> = BTreeSet::new();
        set.insert(self.identity);
        let mut frontier = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                for y in [self.mul(x, g), self.mul(x, self.inv(g))] {
                    if set.insert(y) {
                        frontier.push(y);
                    }
                }
            }
        }
        Ok(set.into_iter().collect())
    }

    pub fn is_subgroup(&self, h: &[usize]) -> bool {
        if h.is_empty() || h.iter().any(|&s| s >= self.order) {
            return false;
        }
        let set: BTreeSet<usize> = h.iter().cloned().collect();
        set.contains(&self.identity)
            && set.iter().all(|&a| {
                set.contains(&self.inv(a)) && set.iter().all(|&b| set.contains(&self.mul(a, b)))
            })
    }

    /// Left cosets sH, ordered by smallest representative, each sorted.
    pub fn left_cosets(&self, h: &[usize]) -> Result<Vec<Vec<usize>>> {
        if !self.is_subgroup(h) {
            return Err(Error::NotASubgroup);
        }
        let mut seen = vec![false; self.order];
        let mut cosets = Vec::new();
        for s in 0..self.order {
            if seen[s] {
                continue;
            }
            let mut coset: Vec<usize> = h.iter().map(|&x| self.mul(s, x)).collect();
            coset.sort_unstable();
            coset.dedup();
            for &x in &coset {
                seen[x] = true;
            }
            cosets.push(coset);
        }
        Ok(cosets)
    }

    /// Characters of an abelian group.
    ///
    /// Groups built from cyclic factors list characters lexicographically in
    /// the exponent vector, so character `k` pairs with element `k`. Other
    /// abelian groups use greedily chosen generators and the lexicographic
    /// order of the generator exponents.
    pub fn characters(&self) -> Result<Vec<Character>> {
        if !self.is_abelian() {
            return Err(Error::NonAbelianGroup);
        }
        if let Some(factors) = &self.cyclic_factors {
            let exps: Vec<Vec<usize>> = (0..self.order).map(|x| mixed_radix(x, factors)).collect();
            return Ok((0..self.order)
                .map(|k| {
                    let kv = &exps[k];
                    let values = exps
                        .iter()
                        .map(|xv| {
                            let frac: f64 = kv
                                .iter()
                                .zip(xv)
                                .zip(factors)
                                .map(|((&ki, &xi), &ni)| ((ki * xi) % ni) as f64 / ni as f64)
                                .sum();
                            root_of_unity(frac)
                        })
                        .collect();
                    Character { values }
                })
                .collect());
        }
        Ok(self.characters_by_search())
    }

    fn characters_by_search(&self) -> Vec<Character> {
        let n = self.order;
        // greedy generating set
        let mut gens = Vec::new();
        let mut sub = vec![self.identity];
        for s in 1..n {
            if !sub.contains(&s) {
                gens.push(s);
                sub = self.subgroup_generated(&gens).expect("nonempty generators");
            }
            if sub.len() == n {
                break;
            }
        }
        let exponent = (0..n).map(|s| self.element_order(s)).fold(1, lcm);
        let orders: Vec<usize> = gens.iter().map(|&g| self.element_order(g)).collect();
        let total: usize = orders.iter().product();
        let mut out = Vec::new();
        for code in 0..total {
            let ks = mixed_radix(code, &orders);
            // phases in units of 2π/exponent
            let mut phase: Vec<Option<usize>> = vec![None; n];
            phase[self.identity] = Some(0);
            let mut stack = vec![self.identity];
            let mut ok = true;
            'bfs: while let Some(x) = stack.pop() {
                let px = phase[x].unwrap();
                for (gi, &g) in gens.iter().enumerate() {
                    let pg = ks[gi] * (exponent / orders[gi]);
                    let y = self.mul(x, g);
                    let py = (px + pg) % exponent;
                    match phase[y] {
                        None => {
                            phase[y] = Some(py);
                            stack.push(y);
                        }
                        Some(p) if p != py => {
                            ok = false;
                            break 'bfs;
                        }
                        _ => {}
                    }
                }
            }
            if ok {
                out.push(Character {
                    values: phase
                        .iter()
                        .map(|p| root_of_unity(p.unwrap() as f64 / exponent as f64))
                        .collect(),
                });
            }
        }
        out
    }

    /// Dihedral presentation if the group has one: an element `r` of order
    /// `|G|/2` and an involution `s` outside `⟨r⟩` with `s r s = r⁻¹`.
    pub fn dihedral_presentation(&self) -> Option<(usize, usize)> {
        let n = self.order;
        if !n.is_multiple_of(2) || n < 2 {
            return None;
        }
        let half = n / 2;
        for r in 0..n {
            if self.element_order(r) != half {
                continue;
            }
            let rot = self.subgroup_generated(&[r]).ok()?;
            for s in 0..n {
                if rot.contains(&s) || self.element_order(s) != 2 {
                    continue;
                }
                if self.mul(self.mul(s, r), s) == self.inv(r) {
                    return Some((r, s));
                }
            }
        }
        None
    }
}

fn mixed_radix(mut x: usize, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for i in (0..radices.len()).rev() {
        digits[i] = x % radices[i];
        x /= radices[i];
    }
    digits
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// exp(2πi·frac), exact for the quarter turns.
pub fn root_of_unity(frac: f64) -> C64 {
    let f = frac.rem_euclid(1.0);
    if f == 0.0 {
        c(1.0, 0.0)
    } else if f == 0.5 {
        c(-1.0, 0.0)
    } else if f == 0.25 {
        c(0.0, 1.0)
    } else if f == 0.75 {
        c(0.0, -1.0)
    } else {
        let a = 2.0 * PI * f;
        c(a.cos(), a.sin())
    }
}

fn cyclic(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::UnsupportedDescriptor("cyclic(0)".into()));
    }
    let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    let inverse = (0..n).map(|a| (n - a) % n).collect();
    Ok(FiniteGroup {
        order: n,
        table,
        identity: 0,
        inverse,
        labels: (0..n).map(|i| i.to_string()).collect(),
        family: Family::Cyclic(n),
        cyclic_factors: Some(vec![n]),
    })
}

fn product(a: &FiniteGroup, b: &FiniteGroup) -> FiniteGroup {
    let (na, nb) = (a.order, b.order);
    let n = na * nb;
    let idx = |x: usize, y: usize| x * nb + y;
    let mut table = vec![vec![0; n]; n];
    for s in 0..n {
        for t in 0..n {
            table[s][t] = idx(a.mul(s / nb, t / nb), b.mul(s % nb, t % nb));
        }
    }
    let inverse = (0..n).map(|s| idx(a.inv(s / nb), b.inv(s % nb))).collect();
    let labels = (0..n)
        .map(|s| format!("({},{})", strip_parens(&a.labels[s / nb]), strip_parens(&b.labels[s % nb])))
        .collect();
    let cyclic_factors = match (&a.cyclic_factors, &b.cyclic_factors) {
        (Some(fa), Some(fb)) => Some(fa.iter().chain(fb).cloned().collect()),
        _ => None,
    };
    FiniteGroup {
        order: n,
        table,
        identity: 0,
        inverse,
        labels,
        family: Family::Product(Box::new(a.family.clone()), Box::new(b.family.clone())),
        cyclic_factors,
    }
}

fn strip_parens(s: &str) -> &str {
    s.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(s)
}

/// Pairs `(n, h)` stored at index `n·|H| + h`, representing the product `h·n`,
/// so that `(n₁,h₁)(n₂,h₂) = (α_{h₂}⁻¹(n₁)·n₂, h₁h₂)`.
fn semidirect(normal: &FiniteGroup, acting: &FiniteGroup, action: &Action) -> Result<FiniteGroup> {
    let (nn, nh) = (normal.order, acting.order);
    let alpha: Vec<Vec<usize>> = match action {
        Action::Table(t) => t.clone(),
        Action::Swap => {
            if nh != 2 {
                return Err(Error::UnsupportedDescriptor("swap action needs |H| = 2".into()));
            }
            let k = (nn as f64).sqrt().round() as usize;
            let swap_ok = match &normal.family {
                Family::Product(fa, fb) => fa == fb && k * k == nn,
                _ => false,
            };
            if !swap_ok {
                return Err(Error::UnsupportedDescriptor(
                    "swap action needs N = K×K built as a product".into(),
                ));
            }
            let swapped = (0..nn).map(|x| (x % k) * k + x / k).collect();
            vec![(0..nn).collect(), swapped]
        }
    };
    if alpha.len() != nh || alpha.iter().any(|p| p.len() != nn || p.iter().any(|&x| x >= nn)) {
        return Err(Error::UnsupportedDescriptor("action table has wrong shape".into()));
    }
    for (h, p) in alpha.iter().enumerate() {
        for a in 0..nn {
            for b in 0..nn {
                if p[normal.mul(a, b)] != normal.mul(p[a], p[b]) {
                    return Err(Error::UnsupportedDescriptor(format!(
                        "action of {h} is not an automorphism"
                    )));
                }
            }
        }
    }
    for h1 in 0..nh {
        for h2 in 0..nh {
            let h12 = acting.mul(h1, h2);
            if (0..nn).any(|x| alpha[h12][x] != alpha[h1][alpha[h2][x]]) {
                return Err(Error::UnsupportedDescriptor("action is not a homomorphism".into()));
            }
        }
    }
    let n = nn * nh;
    let mut table = vec![vec![0; n]; n];
    for s in 0..n {
        let (n1, h1) = (s / nh, s % nh);
        for t in 0..n {
            let (n2, h2) = (t / nh, t % nh);
            let moved = alpha[acting.inv(h2)][n1];
            table[s][t] = normal.mul(moved, n2) * nh + acting.mul(h1, h2);
        }
    }
    let labels = (0..n)
        .map(|s| format!("({},{})", strip_parens(&normal.labels[s / nh]), acting.labels[s % nh]))
        .collect();
    let mut g = FiniteGroup::from_table(table, Some(labels), Family::Semidirect, None)?;
    g.family = Family::Semidirect;
    Ok(g)
}

/// Permutations compose right to left: `(p∘q)(i) = p(q(i))`.
fn symmetric(n: usize) -> Result<FiniteGroup> {
    if n == 0 || n > MAX_SYMMETRIC_DEGREE {
        return Err(Error::UnsupportedDescriptor(format!(
            "symmetric({n}) outside 1..={MAX_SYMMETRIC_DEGREE}"
        )));
    }
    let perms = symmetric_elements(n);
    let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).unwrap();
    let table = perms
        .iter()
        .map(|p| {
            perms
                .iter()
                .map(|q| index(&q.iter().map(|&i| p[i]).collect()))
                .collect()
        })
        .collect();
    let labels = perms.iter().map(|p| cycle_notation(p)).collect();
    FiniteGroup::from_table(table, Some(labels), Family::Symmetric(n), None)
}

/// Permutation (as an image array) stored at each index of `symmetric(n)`.
/// S₃ uses the triangle ordering e, (123), (132), (12), (23), (13); other
/// degrees use lexicographic order.
pub fn symmetric_elements(n: usize) -> Vec<Vec<usize>> {
    if n == 3 {
        vec![
            vec![0, 1, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![1, 0, 2],
            vec![0, 2, 1],
            vec![2, 1, 0],
        ]
    } else {
        permutations(n)
    }
}

/// All permutations of 0..n in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}

/// Cycle notation with 1-based points, `e` for the identity.
pub fn cycle_notation(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        out.push('(');
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            out.push_str(&(x + 1).to_string());
            x = p[x];
        }
        out.push(')');
    }
    if out.is_empty() {
        "e".into()
    } else {
        out
    }
}

/// Dihedral group of order 2n: index `f·n + k` holds `r^k s^f`.
fn dihedral(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::UnsupportedDescriptor("dihedral(0)".into()));
    }
    let order = 2 * n;
    let decode = |x: usize| (x % n, x / n);
    let mut table = vec![vec![0; order]; order];
    for a in 0..order {
        let (ka, fa) = decode(a);
        for b in 0..order {
            let (kb, fb) = decode(b);
            let k = if fa == 0 { (ka + kb) % n } else { (ka + n - kb) % n };
            table[a][b] = ((fa + fb) % 2) * n + k;
        }
    }
    let labels = (0..order)
        .map(|x| {
            let (k, f) = decode(x);
            let r = match k {
                0 => String::new(),
                1 => "r".to_string(),
                _ => format!("r^{k}"),
            };
            match (r.is_empty(), f) {
                (true, 0) => "e".to_string(),
                (true, _) => "s".to_string(),
                (false, 0) => r,
                (false, _) => format!("{r}s"),
            }
        })
        .collect();
    FiniteGroup::from_table(table, Some(labels), Family::Dihedral(n), None)
}

/// One-dimensional unitary representation of a group.
#[derive(Debug, Clone, PartialEq)]
pub struct Character {
    pub values: Vec<C64>,
}

impl Character {
    pub fn is_homomorphism(&self, g: &FiniteGroup, tol: f64) -> bool {
        (self.values[g.identity()] - c(1.0, 0.0)).norm() <= tol
            && g.elements().all(|s| {
                g.elements().all(|t| {
                    (self.values[g.mul(s, t)] - self.values[s] * self.values[t]).norm() <= tol
                })
            })
    }
}

/// Probability weights indexed by group elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMeasure {
    weights: Vec<f64>,
}

impl ProbabilityMeasure {
    /// Validates non-negativity and unit mass; tiny deviations (< 1e-9) are
    /// renormalized.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMeasure(format!("weight {w} is negative or not finite")));
        }
        let total: f64 = weights.iter().sum();
        let dev = (total - 1.0).abs();
        if dev <= MEASURE_TOL {
            Ok(Self { weights })
        } else if dev < MEASURE_RENORM_TOL {
            Ok(Self { weights: weights.iter().map(|w| w / total).collect() })
        } else {
            Err(Error::InvalidMeasure(format!("total mass {total} differs from 1")))
        }
    }

    /// Measure on `g`, checking the length.
    pub fn on(g: &FiniteGroup, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != g.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for a group of order {}",
                weights.len(),
                g.order()
            )));
        }
        Self::new(weights)
    }

    pub fn delta(g: &FiniteGroup, s: usize) -> Self {
        let mut w = vec![0.0; g.order()];
        w[s] = 1.0;
        Self { weights: w }
    }

    /// Uniform (Haar) measure.
    pub fn haar(g: &FiniteGroup) -> Self {
        let n = g.order();
        Self { weights: vec![1.0 / n as f64; n] }
    }

    /// Uniform measure on a subset.
    pub fn uniform_on(g: &FiniteGroup, set: &[usize]) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let mut w = vec![0.0; g.order()];
        for &s in set {
            w[s] = 1.0 / set.len() as f64;
        }
        Self::on(g, w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// μ∗ν(u) = Σ_{st=u} μ(s)ν(t).
    pub fn convolve(&self, other: &Self, g: &FiniteGroup) -> Self {
        let mut w = vec![0.0; g.order()];
        for s in g.elements() {
            if self.weights[s] == 0.0 {
                continue;
            }
            for t in g.elements() {
                w[g.mul(s, t)] += self.weights[s] * other.weights[t];
            }
        }
        Self { weights: w }
    }

    /// n-fold convolution power (n ≥ 1).
    pub fn power(&self, n: usize, g: &FiniteGroup) -> Self {
        let mut acc = self.clone();
        for _ in 1..n.max(1) {
            acc = acc.convolve(self, g);
        }
        acc
    }

    /// μ̌(s) = μ(s⁻¹).
    pub fn reflected(&self, g: &FiniteGroup) -> Self {
        Self { weights: g.elements().map(|s| self.weights[g.inv(s)]).collect() }
    }

    /// Product measure on G×H with the product-index convention.
    pub fn product(&self, other: &Self) -> Self {
        let mut w = Vec::with_capacity(self.len() * other.len());
        for a in &self.weights {
            for b in &other.weights {
                w.push(a * b);
            }
        }
        Self { weights: w }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Uniform weights 1/|G|.
pub fn haar(g: &FiniteGroup) -> ProbabilityMeasure {
    ProbabilityMeasure::haar(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(d: GroupDescriptor) -> FiniteGroup {
        FiniteGroup::build(&d).unwrap()
    }

    #[test]
    fn z2_table() {
        let g = build(GroupDescriptor::Cyclic(2));
        assert_eq!(g.order(), 2);
        assert_eq!(g.table(), &[vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn d4_semidirect_has_two_elements_of_order_four() {
        let g = build(GroupDescriptor::d4_semidirect());
        assert_eq!(g.order(), 8);
        assert!(!g.is_abelian());
        let n4 = g.elements().filter(|&s| g.element_order(s) == 4).count();
        assert_eq!(n4, 2);
        g.check_axioms().unwrap();
        assert!(g.dihedral_presentation().is_some());
    }

    #[test]
    fn s3_is_nonabelian_of_order_six() {
        let g = build(GroupDescriptor::Symmetric(3));
        assert_eq!(g.order(), 6);
        assert!(!g.is_abelian());
        assert_eq!(g.labels(), &["e", "(123)", "(132)", "(12)", "(23)", "(13)"]);
        // (123)∘(12) = (13)
        assert_eq!(g.mul(1, 3), 5);
    }

    #[test]
    fn every_builtin_group_satisfies_axioms() {
        for alias in ["z1", "z7", "z2^3", "z2xz4", "s1", "s4", "d1", "d2", "d5", "d6", "d4-semidirect"] {
            let g = build(GroupDescriptor::from_alias(alias).unwrap());
            g.check_axioms().unwrap();
            for s in g.elements() {
                assert_eq!(g.inv(g.inv(s)), s);
            }
        }
        let s5 = build(GroupDescriptor::Symmetric(5));
        assert_eq!(s5.order(), 120);
        assert!(FiniteGroup::build(&GroupDescriptor::Symmetric(6)).is_err());
    }

    #[test]
    fn explicit_tables_are_validated() {
        let bad_assoc = vec![vec![0, 1, 2], vec![1, 0, 0], vec![2, 0, 1]];
        let r = FiniteGroup::build(&GroupDescriptor::Explicit { table: bad_assoc, labels: None });
        assert!(r.is_err());
        let no_id = vec![vec![1, 0], vec![0, 1]];
        // identity is element 1 here: accepted and relabelled
        let g = FiniteGroup::build(&GroupDescriptor::Explicit { table: no_id, labels: None }).unwrap();
        assert_eq!(g.mul(0, 1), 1);
        let none = vec![vec![0, 0], vec![0, 0]];
        assert_eq!(
            FiniteGroup::build(&GroupDescriptor::Explicit { table: none, labels: None }),
            Err(Error::NoIdentity)
        );
        let not_inv = vec![vec![0, 1], vec![1, 1]];
        assert_eq!(
            FiniteGroup::build(&GroupDescriptor::Explicit { table: not_inv, labels: None }),
            Err(Error::NoInverse(1))
        );
    }

    #[test]
    fn subgroup_generation() {
        let z4 = build(GroupDescriptor::Cyclic(4));
        assert_eq!(z4.subgroup_generated(&[2]).unwrap(), vec![0, 2]);
        let s3 = build(GroupDescriptor::Symmetric(3));
        let t12 = s3.find_label("(12)").unwrap();
        let c123 = s3.find_label("(123)").unwrap();
        assert_eq!(s3.subgroup_generated(&[t12]).unwrap(), vec![0, t12]);
        assert_eq!(s3.subgroup_generated(&[t12, c123]).unwrap().len(), 6);
        assert_eq!(s3.subgroup_generated(&[]), Err(Error::EmptyGeneratorSet));
    }

    #[test]
    fn cosets() {
        let z4 = build(GroupDescriptor::Cyclic(4));
        assert_eq!(z4.left_cosets(&[0, 2]).unwrap(), vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(z4.left_cosets(&[0, 1, 2, 3]).unwrap().len(), 1);
        assert_eq!(z4.left_cosets(&[0, 1]), Err(Error::NotASubgroup));
        let s3 = build(GroupDescriptor::Symmetric(3));
        let h = vec![0, s3.find_label("(12)").unwrap()];
        let cs = s3.left_cosets(&h).unwrap();
        assert_eq!(cs.len(), 3);
        assert!(cs.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn z2_characters() {
        let g = build(GroupDescriptor::Cyclic(2));
        let ch = g.characters().unwrap();
        assert_eq!(ch[0].values, vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(ch[1].values, vec![c(1.0, 0.0), c(-1.0, 0.0)]);
        let s3 = build(GroupDescriptor::Symmetric(3));
        assert_eq!(s3.characters(), Err(Error::NonAbelianGroup));
    }

    #[test]
    fn cyclic_characters_follow_exponential_formula() {
        let d = 5;
        let g = build(GroupDescriptor::Cyclic(d));
        let ch = g.characters().unwrap();
        for s in 0..d {
            for t in 0..d {
                let a = 2.0 * PI * (s * t) as f64 / d as f64;
                assert!((ch[s].values[t] - c(a.cos(), a.sin())).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn z2_power_characters_are_pointwise_products() {
        let g = build(GroupDescriptor::from_alias("z2^3").unwrap());
        let ch = g.characters().unwrap();
        assert_eq!(ch.len(), 8);
        let z2 = build(GroupDescriptor::Cyclic(2)).characters().unwrap();
        for k in 0..8 {
            for x in 0..8 {
                let expect = z2[(k >> 2) & 1].values[(x >> 2) & 1]
                    * z2[(k >> 1) & 1].values[(x >> 1) & 1]
                    * z2[k & 1].values[x & 1];
                assert!((ch[k].values[x] - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn searched_characters_of_relabelled_abelian_group() {
        // Z2×Z2 with the product structure forgotten
        let g = build(GroupDescriptor::from_alias("z2xz2").unwrap());
        let e = FiniteGroup::build(&GroupDescriptor::Explicit {
            table: g.table().to_vec(),
            labels: None,
        })
        .unwrap();
        let ch = e.characters().unwrap();
        assert_eq!(ch.len(), 4);
        assert!(ch.iter().all(|x| x.is_homomorphism(&e, 1e-12)));
    }

    #[test]
    fn convolution_examples() {
        let g = build(GroupDescriptor::Cyclic(2));
        let (p, q) = (0.2, 0.35);
        let mu = ProbabilityMeasure::new(vec![1.0 - p, p]).unwrap();
        let nu = ProbabilityMeasure::new(vec![1.0 - q, q]).unwrap();
        let conv = mu.convolve(&nu, &g);
        assert!((conv.weights()[0] - (1.0 - p - q + 2.0 * p * q)).abs() < 1e-15);
        assert!((conv.weights()[1] - (p + q - 2.0 * p * q)).abs() < 1e-15);
        let s3 = build(GroupDescriptor::Symmetric(3));
        for s in s3.elements() {
            for t in s3.elements() {
                let d = ProbabilityMeasure::delta(&s3, s).convolve(&ProbabilityMeasure::delta(&s3, t), &s3);
                assert_eq!(d, ProbabilityMeasure::delta(&s3, s3.mul(s, t)));
            }
        }
    }

    #[test]
    fn measure_validation() {
        assert!(ProbabilityMeasure::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityMeasure::new(vec![-0.1, 1.1]).is_err());
        let m = ProbabilityMeasure::new(vec![0.5, 0.5 + 1e-11]).unwrap();
        assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_weights() {
        let s3 = build(GroupDescriptor::Symmetric(3));
        assert!(haar(&s3).weights().iter().all(|&w| (w - 1.0 / 6.0).abs() < 1e-16));
        let z2 = build(GroupDescriptor::Cyclic(2));
        assert_eq!(haar(&z2).weights(), &[0.5, 0.5]);
    }

    #[test]
    fn family_display_round_trip() {
        for alias in ["z3", "z2xz4", "s4", "d6"] {
            let g = build(GroupDescriptor::from_alias(alias).unwrap());
            let f = g.family().to_string();
            assert_eq!(Family::parse(&f).as_ref(), Some(g.family()));
        }
    }

    #[test]
    fn cycle_labels() {
        assert_eq!(cycle_notation(&[1, 0, 3, 2]), "(12)(34)");
        assert_eq!(cycle_notation(&[0, 1]), "e");
        assert_eq!(permutations(3).len(), 6);
    }
}
