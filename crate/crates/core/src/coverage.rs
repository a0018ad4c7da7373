//! Conjugacy classes of `GL_n(GF(p))` and `SL_n(GF(p))`, class-product
//! closures, conjugacy width, and the covering criteria by index and by
//! distance to the center.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use serde::Serialize;

use crate::canonical::{index, invariant_factors};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::mat::Mat;
use crate::rank::{dist_to_center, RankValue};

pub const DEFAULT_GROUP_BUDGET: u128 = 100_000;

/// `|GL_n(q)| = prod (q^n - q^i)`, divided by `q - 1` for `SL_n`.
pub fn group_order(n: usize, p: u32, special: bool) -> u128 {
    let q = p as u128;
    let qn = q.pow(n as u32);
    let gl: u128 = (0..n).map(|i| qn - q.pow(i as u32)).product();
    if special {
        gl / (q - 1)
    } else {
        gl
    }
}

/// A set of conjugacy classes, by id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassSet {
    words: Vec<u64>,
    len: usize,
}

impl ClassSet {
    pub fn empty(len: usize) -> ClassSet {
        ClassSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> ClassSet {
        let mut s = ClassSet::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn union_with(&mut self, o: &ClassSet) {
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a |= b;
        }
    }

    pub fn is_full(&self) -> bool {
        (0..self.len).all(|i| self.contains(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.contains(i))
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// All elements of `GL_n(GF(p))` or `SL_n(GF(p))` with their conjugacy
/// classes. Elements are sorted by base-`p` code and class ids follow the
/// smallest element index of each class.
#[derive(Debug)]
pub struct ClassTable {
    field: FieldSpec,
    n: usize,
    special: bool,
    elements: Vec<Vec<u32>>,
    lookup: HashMap<u64, usize>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    indices: Vec<usize>,
    center_dist: Vec<RankValue>,
    inverse_class: Vec<usize>,
    factors: Vec<Vec<Vec<u32>>>,
    products: Vec<OnceLock<Vec<ClassSet>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassInfo {
    pub id: usize,
    pub size: usize,
    pub ind: usize,
    pub center_dist: RankValue,
}

fn encode(p: u64, data: &[u32]) -> u64 {
    data.iter().fold(0u64, |acc, &v| acc * p + v as u64)
}

fn mul_raw(f: FieldSpec, n: usize, a: &[u32], b: &[u32]) -> Vec<u32> {
    let p = f.p() as u64;
    let mut out = vec![0u32; n * n];
    for i in 0..n {
        for j in 0..n {
            let s: u64 = (0..n)
                .map(|k| a[i * n + k] as u64 * b[k * n + j] as u64)
                .sum();
            out[i * n + j] = (s % p) as u32;
        }
    }
    out
}

fn generators(f: FieldSpec, n: usize, special: bool) -> Vec<Mat> {
    let mut gens = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                gens.push(Mat::unit(f, n, i, j).add_scalar(1));
            }
        }
    }
    if !special && f.p() > 2 {
        let mut d = Mat::identity(f, n);
        d.set(0, 0, f.primitive_root());
        gens.push(d);
    }
    gens
}

/// Enumerates the group and its conjugacy classes. The class partition is
/// checked against the invariant factors: constant on every class, and for
/// `GL_n` distinct classes have distinct factors.
pub fn enumerate_group(n: usize, p: u32, special: bool, budget: u128) -> Result<ClassTable> {
    let f = FieldSpec::new(p as u64)?;
    if n == 0 {
        return Err(Error::PreconditionViolation("dimension must be positive".into()));
    }
    let order = group_order(n, p, special);
    if order > budget {
        return Err(Error::BudgetExceeded {
            what: "group order".into(),
            needed: order,
            budget,
        });
    }
    if (p as u64).checked_pow((n * n) as u32).is_none() {
        return Err(Error::PreconditionViolation(
            "matrix codes do not fit in 64 bits".into(),
        ));
    }
    let pc = p as u64;
    let gens = generators(f, n, special);
    let gen_data: Vec<&[u32]> = gens.iter().map(Mat::data).collect();
    let gen_inv: Vec<Mat> = gens.iter().map(|g| g.inverse().expect("unit")).collect();

    let id = Mat::identity(f, n).data().to_vec();
    let mut seen: HashSet<u64> = HashSet::from([encode(pc, &id)]);
    let mut elements = vec![id];
    let mut head = 0;
    while head < elements.len() {
        let x = elements[head].clone();
        head += 1;
        for g in &gen_data {
            let y = mul_raw(f, n, g, &x);
            if seen.insert(encode(pc, &y)) {
                elements.push(y);
            }
        }
    }
    assert_eq!(elements.len() as u128, order, "enumeration disagrees with the order formula");
    elements.sort_by_key(|x| encode(pc, x));
    let lookup: HashMap<u64, usize> = elements
        .iter()
        .enumerate()
        .map(|(i, x)| (encode(pc, x), i))
        .collect();

    let mut class_of = vec![usize::MAX; elements.len()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for start in 0..elements.len() {
        if class_of[start] != usize::MAX {
            continue;
        }
        let cid = classes.len();
        class_of[start] = cid;
        let mut orbit = vec![start];
        let mut h = 0;
        while h < orbit.len() {
            let x = &elements[orbit[h]];
            h += 1;
            for (g, gi) in gen_data.iter().zip(&gen_inv) {
                let y = mul_raw(f, n, &mul_raw(f, n, g, x), gi.data());
                let j = lookup[&encode(pc, &y)];
                if class_of[j] == usize::MAX {
                    class_of[j] = cid;
                    orbit.push(j);
                }
            }
        }
        orbit.sort_unstable();
        classes.push(orbit);
    }

    let to_mat = |i: usize| Mat::from_raw(f, n, elements[i].clone());
    let factor_codes =
        |m: &Mat| -> Vec<Vec<u32>> { invariant_factors(m).iter().map(|q| q.coeffs().to_vec()).collect() };
    let mut factors = Vec::with_capacity(classes.len());
    let mut indices = Vec::with_capacity(classes.len());
    let mut center_dist = Vec::with_capacity(classes.len());
    let mut inverse_class = Vec::with_capacity(classes.len());
    for class in &classes {
        let rep = to_mat(class[0]);
        let fc = factor_codes(&rep);
        for &i in &class[1..] {
            assert_eq!(factor_codes(&to_mat(i)), fc, "invariant factors vary within a class");
        }
        factors.push(fc);
        indices.push(index(&rep));
        center_dist.push(dist_to_center(&rep).dist);
        let inv = rep.inverse().expect("unit");
        inverse_class.push(class_of[lookup[&encode(pc, inv.data())]]);
    }
    if !special {
        let distinct: HashSet<&Vec<Vec<u32>>> = factors.iter().collect();
        assert_eq!(distinct.len(), classes.len(), "distinct classes share invariant factors");
    }
    let products = (0..classes.len()).map(|_| OnceLock::new()).collect();
    Ok(ClassTable {
        field: f,
        n,
        special,
        elements,
        lookup,
        class_of,
        classes,
        indices,
        center_dist,
        inverse_class,
        factors,
        products,
    })
}

impl ClassTable {
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn special(&self) -> bool {
        self.special
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn element(&self, i: usize) -> Mat {
        Mat::from_raw(self.field, self.n, self.elements[i].clone())
    }

    pub fn lookup(&self, m: &Mat) -> Option<usize> {
        if m.field() != self.field || m.n() != self.n {
            return None;
        }
        self.lookup.get(&encode(self.field.p() as u64, m.data())).copied()
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.class_of[i]
    }

    pub fn class(&self, c: usize) -> &[usize] {
        &self.classes[c]
    }

    pub fn index(&self, c: usize) -> usize {
        self.indices[c]
    }

    pub fn center_dist(&self, c: usize) -> RankValue {
        self.center_dist[c]
    }

    pub fn inverse_class(&self, c: usize) -> usize {
        self.inverse_class[c]
    }

    /// Coefficients of the invariant factors shared by the class.
    pub fn factors(&self, c: usize) -> &[Vec<u32>] {
        &self.factors[c]
    }

    pub fn class_infos(&self) -> Vec<ClassInfo> {
        (0..self.num_classes())
            .map(|id| ClassInfo {
                id,
                size: self.classes[id].len(),
                ind: self.indices[id],
                center_dist: self.center_dist[id],
            })
            .collect()
    }

    /// The center read off the singleton classes.
    pub fn center(&self) -> Vec<Mat> {
        self.classes
            .iter()
            .filter(|c| c.len() == 1)
            .map(|c| self.element(c[0]))
            .collect()
    }

    fn check_class(&self, c: usize) -> Result<()> {
        if c >= self.num_classes() {
            return Err(Error::PreconditionViolation(format!(
                "class id {c} out of range (there are {} classes)",
                self.num_classes()
            )));
        }
        Ok(())
    }

    /// Classes met by `C * D` for every `D`, computed from one
    /// representative of `C`.
    fn product_row(&self, c: usize) -> &[ClassSet] {
        self.products[c].get_or_init(|| {
            let k = self.num_classes();
            let rep = &self.elements[self.classes[c][0]];
            let pc = self.field.p() as u64;
            (0..k)
                .map(|d| {
                    let mut s = ClassSet::empty(k);
                    for &x in &self.classes[d] {
                        let y = mul_raw(self.field, self.n, rep, &self.elements[x]);
                        s.insert(self.class_of[self.lookup[&encode(pc, &y)]]);
                    }
                    s
                })
                .collect()
        })
    }

    /// `S * C` for a union of classes `S`.
    pub fn multiply_by_class(&self, s: &ClassSet, c: usize) -> ClassSet {
        let row = self.product_row(c);
        let mut out = ClassSet::empty(self.num_classes());
        for d in s.iter() {
            out.union_with(&row[d]);
        }
        out
    }

    pub fn size_of(&self, s: &ClassSet) -> usize {
        s.iter().map(|c| self.classes[c].len()).sum()
    }

    pub fn elements_of(&self, s: &ClassSet) -> Vec<usize> {
        let mut v: Vec<usize> = s.iter().flat_map(|c| self.classes[c].iter().copied()).collect();
        v.sort_unstable();
        v
    }

    fn identity_class(&self) -> usize {
        let id = Mat::identity(self.field, self.n);
        self.class_of[self.lookup(&id).expect("identity")]
    }
}

/// `Cl(g_1) ... Cl(g_m)` as a set of classes; the empty product is `{1}`.
pub fn class_product_closure(table: &ClassTable, class_ids: &[usize]) -> Result<ClassSet> {
    for &c in class_ids {
        table.check_class(c)?;
    }
    let mut s = ClassSet::empty(table.num_classes());
    s.insert(table.identity_class());
    for &c in class_ids {
        s = table.multiply_by_class(&s, c);
    }
    Ok(s)
}

/// Element-level product by brute force, for checking the class-level
/// closure.
pub fn class_product_bruteforce(table: &ClassTable, class_ids: &[usize]) -> Result<Vec<usize>> {
    let mut cur: Vec<bool> = vec![false; table.order()];
    cur[table.lookup(&Mat::identity(table.field, table.n)).expect("identity")] = true;
    let pc = table.field.p() as u64;
    for &c in class_ids {
        table.check_class(c)?;
        let mut next = vec![false; table.order()];
        for (x, _) in cur.iter().enumerate().filter(|(_, &b)| b) {
            for &y in table.class(c) {
                let z = mul_raw(table.field, table.n, &table.elements[x], &table.elements[y]);
                next[table.lookup[&encode(pc, &z)]] = true;
            }
        }
        cur = next;
    }
    Ok(cur
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub order: usize,
    pub tuple: Vec<usize>,
    pub sum_ind: usize,
    pub sum_center_dist: RankValue,
    /// `6(n-1)` for the index criterion, `12` for the distance criterion.
    pub threshold: RankValue,
    pub hypothesis: bool,
    pub covered: bool,
    pub coverage_fraction: RankValue,
    /// `None` when the hypothesis fails and nothing is claimed.
    pub claim_holds: Option<bool>,
    /// `sum d(a_i, K) <= (2/n) sum ind(a_i)`
    pub consistency: bool,
}

fn coverage_report(
    table: &ClassTable,
    class_ids: &[usize],
    threshold: RankValue,
    hypothesis: impl Fn(usize, RankValue) -> bool,
) -> Result<CoverageReport> {
    if table.n <= 2 {
        return Err(Error::HypothesisNotMet(format!("n = {} is not above 2", table.n)));
    }
    if !table.special {
        return Err(Error::HypothesisNotMet("the group is not SL_n".into()));
    }
    let s = class_product_closure(table, class_ids)?;
    let n = table.n as u64;
    let sum_ind: usize = class_ids.iter().map(|&c| table.index(c)).sum();
    let sum_d = class_ids
        .iter()
        .fold(RankValue::zero(n), |acc, &c| acc.add(table.center_dist(c)));
    let covered = s.is_full();
    let hyp = hypothesis(sum_ind, sum_d);
    Ok(CoverageReport {
        order: table.order(),
        tuple: class_ids.to_vec(),
        sum_ind,
        sum_center_dist: sum_d,
        threshold,
        hypothesis: hyp,
        covered,
        coverage_fraction: RankValue::new(table.size_of(&s) as u64, table.order() as u64),
        claim_holds: hyp.then_some(covered),
        consistency: sum_d <= RankValue::new(2 * sum_ind as u64, n),
    })
}

/// Coverage by index: `sum ind(a_i) > 6(n-1)` forces `Cl(a_1)...Cl(a_m) = SL_n`.
pub fn rodgers_saxl_check(table: &ClassTable, class_ids: &[usize]) -> Result<CoverageReport> {
    let t = 6 * (table.n.max(1) - 1);
    coverage_report(table, class_ids, RankValue::new(t as u64, 1), |s, _| s > t)
}

/// Coverage by distance: `sum d(a_i, K) >= 12` forces `Cl(a_1)...Cl(a_m) = SL_n`.
pub fn corollary_index_check(table: &ClassTable, class_ids: &[usize]) -> Result<CoverageReport> {
    let t = RankValue::new(12, 1);
    coverage_report(table, class_ids, t, |_, d| d >= t)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WidthReport {
    pub class_id: usize,
    pub inverse_class_id: usize,
    /// `None` when `Cl(g) u Cl(g^-1)` generates a proper subgroup.
    pub width: Option<usize>,
    pub center_dist: RankValue,
    /// `ceil(12 / d(g, K))`, absent for central classes.
    pub predicted: Option<u64>,
}

/// Least `m` with `(Cl(g) u Cl(g^-1))^m = G`.
pub fn conjugacy_width(table: &ClassTable, class_id: usize) -> Result<Option<usize>> {
    table.check_class(class_id)?;
    let k = table.num_classes();
    let inv = table.inverse_class(class_id);
    let mut s = ClassSet::empty(k);
    s.insert(class_id);
    s.insert(inv);
    let mut t = s.clone();
    let mut seen: HashSet<ClassSet> = HashSet::new();
    let mut m = 1;
    loop {
        if t.is_full() {
            return Ok(Some(m));
        }
        if !seen.insert(t.clone()) {
            return Ok(None);
        }
        let mut next = table.multiply_by_class(&t, class_id);
        if inv != class_id {
            next.union_with(&table.multiply_by_class(&t, inv));
        }
        t = next;
        m += 1;
    }
}

pub fn width_report(table: &ClassTable, class_id: usize) -> Result<WidthReport> {
    let width = conjugacy_width(table, class_id)?;
    let d = table.center_dist(class_id);
    Ok(WidthReport {
        class_id,
        inverse_class_id: table.inverse_class(class_id),
        width,
        center_dist: d,
        predicted: (!d.is_zero()).then(|| (12 * d.den).div_ceil(d.num)),
    })
}

/// Resolves `auto:rs` (index criterion) or `auto:cor` (distance criterion)
/// to the shortest tuple repeating one class of largest index or distance.
pub fn auto_tuple(table: &ClassTable, mode: &str) -> Result<Vec<usize>> {
    let k = table.num_classes();
    let pick = |key: &dyn Fn(usize) -> RankValue| -> Option<usize> {
        (0..k).filter(|&c| !key(c).is_zero()).max_by(|&a, &b| key(a).cmp(&key(b)).then(b.cmp(&a)))
    };
    match mode {
        "rs" => {
            let t = 6 * (table.n.max(1) - 1);
            let c = pick(&|c| RankValue::new(table.index(c) as u64, 1))
                .ok_or_else(|| Error::HypothesisNotMet("no class of positive index".into()))?;
            Ok(vec![c; t / table.index(c) + 1])
        }
        "cor" => {
            let c = pick(&|c| table.center_dist(c))
                .ok_or_else(|| Error::HypothesisNotMet("no noncentral class".into()))?;
            let d = table.center_dist(c);
            Ok(vec![c; (12 * d.den).div_ceil(d.num) as usize])
        }
        _ => Err(Error::Parse(format!("unknown tuple selector auto:{mode}"))),
    }
}

/// Parses `auto:rs`, `auto:cor`, or comma-separated class ids.
pub fn parse_classes(table: &ClassTable, spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    if spec == "auto" {
        return auto_tuple(table, "rs");
    }
    if let Some(mode) = spec.strip_prefix("auto:") {
        return auto_tuple(table, mode);
    }
    let ids = spec
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad class id {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    for &c in &ids {
        table.check_class(c)?;
    }
    Ok(ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize, p: u32, special: bool) -> ClassTable {
        enumerate_group(n, p, special, DEFAULT_GROUP_BUDGET).unwrap()
    }

    #[test]
    fn orders() {
        assert_eq!(table(2, 2, true).order(), 6);
        assert_eq!(table(3, 2, true).order(), 168);
        assert_eq!(table(2, 3, false).order(), 48);
        assert_eq!(table(1, 5, false).order(), 4);
        assert!(matches!(
            enumerate_group(4, 3, false, DEFAULT_GROUP_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn class_counts() {
        // GL_2(q) has q^2 - 1 classes
        assert_eq!(table(2, 3, false).num_classes(), 8);
        assert_eq!(table(2, 5, false).num_classes(), 24);
        assert_eq!(table(3, 2, true).num_classes(), 6);
        // SL_2(3) splits the unipotent classes
        assert_eq!(table(2, 3, true).num_classes(), 7);
    }

    #[test]
    fn center_is_scalars() {
        for (n, p, special) in [(2, 3, false), (3, 2, false), (2, 5, true), (2, 3, true)] {
            let t = table(n, p, special);
            let c = t.center();
            assert!(c.iter().all(|m| m.as_scalar().is_some()));
            let f = t.field();
            let scalars = (1..p)
                .filter(|&s| !special || f.pow(s, n as u64) == 1)
                .count();
            assert_eq!(c.len(), scalars);
        }
    }

    #[test]
    fn closure_matches_bruteforce() {
        let t = table(3, 2, true);
        for tuple in [vec![], vec![1], vec![1, 1], vec![2, 3], vec![5, 4, 1]] {
            let s = class_product_closure(&t, &tuple).unwrap();
            assert_eq!(t.elements_of(&s), class_product_bruteforce(&t, &tuple).unwrap());
        }
        for c in 0..t.num_classes() {
            let s = class_product_closure(&t, &[c, t.inverse_class(c)]).unwrap();
            assert!(s.contains(t.class_of(t.lookup(&Mat::identity(t.field(), 3)).unwrap())));
        }
    }

    #[test]
    fn transvections_cover() {
        let t = table(3, 2, true);
        let tv = (0..t.num_classes()).find(|&c| t.index(c) == 1).unwrap();
        let r = rodgers_saxl_check(&t, &[tv; 13]).unwrap();
        assert_eq!((r.hypothesis, r.covered, r.claim_holds), (true, true, Some(true)));
        let r = rodgers_saxl_check(&t, &[tv; 3]).unwrap();
        assert_eq!(r.claim_holds, None);
        assert!(matches!(
            rodgers_saxl_check(&table(2, 3, true), &[0]),
            Err(Error::HypothesisNotMet(_))
        ));
    }

    #[test]
    fn auto_tuples_cover() {
        let t = table(3, 2, true);
        let rs = parse_classes(&t, "auto:rs").unwrap();
        assert!(rodgers_saxl_check(&t, &rs).unwrap().claim_holds == Some(true));
        let cor = parse_classes(&t, "auto:cor").unwrap();
        assert_eq!(cor.len(), 12);
        assert_eq!(t.center_dist(cor[0]), RankValue::new(1, 1));
        assert!(corollary_index_check(&t, &cor).unwrap().claim_holds == Some(true));
        assert!(parse_classes(&t, "0,1, 2").is_ok());
        assert!(parse_classes(&t, "9").is_err());
    }

    #[test]
    fn widths() {
        let t = table(2, 3, false);
        let id = t.class_of(t.lookup(&Mat::identity(t.field(), 2)).unwrap());
        assert_eq!(conjugacy_width(&t, id).unwrap(), None);
        let minus = t.class_of(t.lookup(&Mat::scalar(t.field(), 2, 2)).unwrap());
        assert_eq!(conjugacy_width(&t, minus).unwrap(), None);
        let s = table(3, 2, true);
        let tv = (0..s.num_classes()).find(|&c| s.index(c) == 1).unwrap();
        let w = conjugacy_width(&s, tv).unwrap().unwrap();
        assert!(w >= 2);
        let r = width_report(&s, tv).unwrap();
        assert_eq!(r.predicted, Some(36));
    }
}
