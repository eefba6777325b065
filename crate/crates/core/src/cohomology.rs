//! Graded-commutative algebra over the two-element field: cup-length,
//! module-theoretic (relative) cup-length, tensor products, suspension,
//! and the index data of hyperbolic rest points. Everything is finitely
//! presented by truncated monomial bases, so all searches are exact.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{CoreError, Result};

/// A multiplicative generator g with g^(power_bound + 1) = 0. Exterior
/// generators carry power_bound 1, truncated polynomial generators a
/// higher bound.
#[derive(Clone, Debug, Serialize)]
pub struct Generator {
    pub name: String,
    pub degree: usize,
    pub power_bound: usize,
}

/// F_2 sum of basis monomials, stored by basis index.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Element {
    pub bits: BTreeSet<usize>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn singleton(i: usize) -> Self {
        Element {
            bits: [i].into_iter().collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.bits.is_empty()
    }

    /// Addition over F_2 is the symmetric difference.
    pub fn add_assign(&mut self, other: &Element) {
        for &b in &other.bits {
            if !self.bits.remove(&b) {
                self.bits.insert(b);
            }
        }
    }
}

/// Monomial-basis presentation of a graded-commutative F_2 algebra whose
/// generators satisfy independent power truncations. Over F_2 the
/// graded signs disappear, so multiplication is exponent addition with
/// overflow to zero.
#[derive(Clone, Debug, Serialize)]
pub struct GradedAlgebra {
    generators: Vec<Generator>,
    /// Exponent vectors, one per basis monomial; index 0 is the unit.
    basis: Vec<Vec<usize>>,
}

impl GradedAlgebra {
    pub fn new(generators: Vec<Generator>) -> Result<Self> {
        let count: usize = generators
            .iter()
            .map(|g| g.power_bound + 1)
            .try_fold(1usize, |acc, f| acc.checked_mul(f))
            .ok_or_else(|| CoreError::InvalidParameter("basis overflow".into()))?;
        if count > 1 << 20 {
            return Err(CoreError::InvalidParameter(format!(
                "monomial basis of size {count} is beyond desk scale"
            )));
        }
        for g in &generators {
            if g.degree == 0 {
                return Err(CoreError::InvalidParameter(format!(
                    "generator {} must have positive degree",
                    g.name
                )));
            }
        }
        let mut basis = vec![vec![]];
        for (i, g) in generators.iter().enumerate() {
            let mut next = Vec::new();
            for e in &basis {
                for p in 0..=g.power_bound {
                    let mut v = e.clone();
                    v.push(p);
                    next.push(v);
                }
            }
            basis = next;
            let _ = i;
        }
        basis.sort();
        Ok(GradedAlgebra { generators, basis })
    }

    /// The algebra with no generators (cohomology of a point).
    pub fn trivial() -> Self {
        GradedAlgebra {
            generators: vec![],
            basis: vec![vec![]],
        }
    }

    /// Exterior algebra on `count` degree-1 generators.
    pub fn exterior(count: usize, prefix: &str) -> Result<Self> {
        Self::new(
            (0..count)
                .map(|i| Generator {
                    name: format!("{prefix}{}", i + 1),
                    degree: 1,
                    power_bound: 1,
                })
                .collect(),
        )
    }

    /// Truncated polynomial algebra F_2[u] / u^(bound + 1), deg u = 2.
    pub fn truncated_polynomial(bound: usize) -> Result<Self> {
        Self::new(vec![Generator {
            name: "u".into(),
            degree: 2,
            power_bound: bound,
        }])
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_exponents(&self, i: usize) -> &[usize] {
        &self.basis[i]
    }

    pub fn basis_degree(&self, i: usize) -> usize {
        self.basis[i]
            .iter()
            .zip(&self.generators)
            .map(|(e, g)| e * g.degree)
            .sum()
    }

    fn index_of(&self, exps: &[usize]) -> Option<usize> {
        self.basis.binary_search_by(|b| b.as_slice().cmp(exps)).ok()
    }

    pub fn unit(&self) -> Element {
        Element::singleton(self.index_of(&vec![0; self.generators.len()]).unwrap())
    }

    pub fn monomial(&self, exps: &[usize]) -> Result<Element> {
        assert_eq!(exps.len(), self.generators.len());
        match self.index_of(exps) {
            Some(i) => Ok(Element::singleton(i)),
            None => Err(CoreError::InvalidParameter(format!(
                "exponents {exps:?} exceed the truncation bounds"
            ))),
        }
    }

    fn mul_basis(&self, i: usize, j: usize) -> Option<usize> {
        let mut exps = self.basis[i].clone();
        for ((e, f), g) in exps.iter_mut().zip(&self.basis[j]).zip(&self.generators) {
            *e += f;
            if *e > g.power_bound {
                return None;
            }
        }
        self.index_of(&exps)
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        let mut out = Element::zero();
        for &i in &a.bits {
            for &j in &b.bits {
                if let Some(k) = self.mul_basis(i, j) {
                    out.add_assign(&Element::singleton(k));
                }
            }
        }
        out
    }

    /// Free product of the two presentations; generator names are kept
    /// as given (callers disambiguate by prefix).
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        Self::new(gens)
    }

    /// Longest nonzero product of positive-degree classes. With a
    /// truncated monomial basis this is the largest exponent sum of a
    /// basis monomial: that monomial is itself such a product, and no
    /// longer product survives the truncations.
    pub fn cup_length(&self) -> usize {
        self.basis
            .iter()
            .map(|e| e.iter().sum::<usize>())
            .max()
            .unwrap_or(0)
    }
}

/// A graded module over a `GradedAlgebra`, presented by a finite basis
/// and the action of each algebra generator on each basis element.
#[derive(Clone, Debug, Serialize)]
pub struct GradedModule {
    algebra: GradedAlgebra,
    basis_degrees: Vec<usize>,
    /// action[g][b] = generator g applied to module basis element b.
    action: Vec<Vec<Element>>,
}

impl GradedModule {
    pub fn new(
        algebra: GradedAlgebra,
        basis_degrees: Vec<usize>,
        action: Vec<Vec<Element>>,
    ) -> Result<Self> {
        if action.len() != algebra.generators().len() {
            return Err(CoreError::InvalidParameter(
                "one action row per generator required".into(),
            ));
        }
        for row in &action {
            if row.len() != basis_degrees.len() {
                return Err(CoreError::InvalidParameter(
                    "action row length must match the module basis".into(),
                ));
            }
        }
        let module = GradedModule {
            algebra,
            basis_degrees,
            action,
        };
        module.check_grading()?;
        Ok(module)
    }

    fn check_grading(&self) -> Result<()> {
        for (g, row) in self.algebra.generators().iter().zip(&self.action) {
            for (b, out) in row.iter().enumerate() {
                for &t in &out.bits {
                    if self.basis_degrees[t] != self.basis_degrees[b] + g.degree {
                        return Err(CoreError::InvalidParameter(format!(
                            "action of {} breaks the grading at basis element {b}",
                            g.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn zero_module(algebra: GradedAlgebra) -> Self {
        let gens = algebra.generators().len();
        GradedModule {
            algebra,
            basis_degrees: vec![],
            action: vec![vec![]; gens],
        }
    }

    /// The algebra as a free rank-1 module over itself, shifted by
    /// `shift` (the relative class alpha_0 sits in degree `shift`).
    pub fn free_rank_one(algebra: GradedAlgebra, shift: usize) -> Self {
        let degrees: Vec<usize> = (0..algebra.basis_len())
            .map(|i| algebra.basis_degree(i) + shift)
            .collect();
        let action: Vec<Vec<Element>> = (0..algebra.generators().len())
            .map(|g| {
                let mut exps = vec![0; algebra.generators().len()];
                exps[g] = 1;
                let gen = algebra.monomial(&exps).unwrap();
                (0..algebra.basis_len())
                    .map(|b| algebra.mul(&gen, &Element::singleton(b)))
                    .collect()
            })
            .collect();
        GradedModule {
            algebra,
            basis_degrees: degrees,
            action,
        }
    }

    pub fn algebra(&self) -> &GradedAlgebra {
        &self.algebra
    }

    pub fn basis_degrees(&self) -> &[usize] {
        &self.basis_degrees
    }

    pub fn is_zero(&self) -> bool {
        self.basis_degrees.is_empty()
    }

    pub fn act_generator(&self, g: usize, e: &Element) -> Element {
        let mut out = Element::zero();
        for &b in &e.bits {
            out.add_assign(&self.action[g][b]);
        }
        out
    }

    /// Ranks by degree of the underlying graded vector space.
    pub fn ranks(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for &d in &self.basis_degrees {
            *out.entry(d).or_insert(0) += 1;
        }
        out
    }

    /// Degree shift by `shift`; the action table is unchanged.
    pub fn suspend(&self, shift: usize) -> Self {
        GradedModule {
            algebra: self.algebra.clone(),
            basis_degrees: self.basis_degrees.iter().map(|d| d + shift).collect(),
            action: self.action.clone(),
        }
    }

    /// Restricts the action to the named subset of algebra generators,
    /// modeling a pullback along a surjection of coefficient algebras.
    pub fn restrict_to_subalgebra(&self, keep: &[usize]) -> Result<Self> {
        let gens: Vec<Generator> = keep
            .iter()
            .map(|&g| self.algebra.generators()[g].clone())
            .collect();
        let algebra = GradedAlgebra::new(gens)?;
        let action = keep.iter().map(|&g| self.action[g].clone()).collect();
        GradedModule::new(algebra, self.basis_degrees.clone(), action)
    }
}

/// Module-theoretic cup-length: 0 for the zero module; otherwise one
/// more than the longest chain of positive-degree actions that stays
/// nonzero. Over F_2, chains of algebra generators suffice: any nonzero
/// iterated action of positive-degree classes expands into monomial
/// chains, at least one of which is nonzero and at least as long.
pub fn relative_cup_length(m: &GradedModule) -> usize {
    if m.is_zero() {
        return 0;
    }
    let gens = m.algebra.generators().len();
    let mut memo: HashMap<Element, usize> = HashMap::new();
    fn longest(
        m: &GradedModule,
        gens: usize,
        e: &Element,
        memo: &mut HashMap<Element, usize>,
    ) -> usize {
        if let Some(&v) = memo.get(e) {
            return v;
        }
        let mut best = 0;
        for g in 0..gens {
            let next = m.act_generator(g, e);
            if !next.is_zero() {
                best = best.max(1 + longest(m, gens, &next, memo));
            }
        }
        memo.insert(e.clone(), best);
        best
    }
    let chain = (0..m.basis_degrees.len())
        .map(|b| longest(m, gens, &Element::singleton(b), &mut memo))
        .max()
        .unwrap_or(0);
    1 + chain
}

/// Tensor product over F_2: pairs of basis elements, componentwise
/// action. The closed form
/// RCL(M1 (x) M2) = RCL(M1) + RCL(M2) - 1 (both factors nonzero)
/// is asserted against a direct search on the product.
pub fn tensor_product(m1: &GradedModule, m2: &GradedModule) -> Result<GradedModule> {
    let algebra = m1.algebra.tensor(&m2.algebra)?;
    let n1 = m1.basis_degrees.len();
    let n2 = m2.basis_degrees.len();
    let pair = |b1: usize, b2: usize| b1 * n2 + b2;
    let mut degrees = vec![0; n1 * n2];
    for b1 in 0..n1 {
        for b2 in 0..n2 {
            degrees[pair(b1, b2)] = m1.basis_degrees[b1] + m2.basis_degrees[b2];
        }
    }
    let mut action = Vec::new();
    for g in 0..m1.algebra.generators().len() {
        let mut row = vec![Element::zero(); n1 * n2];
        for b1 in 0..n1 {
            let img = &m1.action[g][b1];
            for b2 in 0..n2 {
                let mut out = Element::zero();
                for &t in &img.bits {
                    out.add_assign(&Element::singleton(pair(t, b2)));
                }
                row[pair(b1, b2)] = out;
            }
        }
        action.push(row);
    }
    for g in 0..m2.algebra.generators().len() {
        let mut row = vec![Element::zero(); n1 * n2];
        for b2 in 0..n2 {
            let img = &m2.action[g][b2];
            for b1 in 0..n1 {
                let mut out = Element::zero();
                for &t in &img.bits {
                    out.add_assign(&Element::singleton(pair(b1, t)));
                }
                row[pair(b1, b2)] = out;
            }
        }
        action.push(row);
    }
    let product = GradedModule::new(algebra, degrees, action)?;
    if !m1.is_zero() && !m2.is_zero() {
        let expected = relative_cup_length(m1) + relative_cup_length(m2) - 1;
        let searched = relative_cup_length(&product);
        assert_eq!(
            searched, expected,
            "tensor cup-length search disagrees with the sum rule"
        );
    }
    Ok(product)
}

/// Index data of a hyperbolic rest point of a linear flow: homology
/// concentrated in the degree equal to the number of expanding
/// directions, with the trivial module structure.
#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub ranks: BTreeMap<usize, usize>,
    pub rcl: usize,
    pub lower_bound: usize,
}

pub fn hyperbolic_conley_index(eigen_signs: &[f64]) -> Result<IndexReport> {
    for (i, s) in eigen_signs.iter().enumerate() {
        if *s == 0.0 {
            return Err(CoreError::DegenerateSign(i));
        }
    }
    let unstable = eigen_signs.iter().filter(|s| **s > 0.0).count();
    let module = GradedModule::new(GradedAlgebra::trivial(), vec![unstable], vec![])?;
    Ok(IndexReport {
        ranks: module.ranks(),
        rcl: relative_cup_length(&module),
        lower_bound: relative_cup_length(&module),
    })
}

/// Rest-point lower bound for a gradient-like flow with the given index
/// module: the relative cup-length itself.
pub fn rest_point_lower_bound(m: &GradedModule) -> usize {
    relative_cup_length(m)
}

/// Index module of the torus factor: free rank 1 over the exterior
/// algebra on 2m degree-1 classes.
pub fn torus_model(m: usize) -> Result<GradedModule> {
    Ok(GradedModule::free_rank_one(
        GradedAlgebra::exterior(2 * m, "a")?,
        0,
    ))
}

/// Index module of the projective factor: free rank 1 over
/// F_2[u] / u^(n+1).
pub fn proj_model(n: usize) -> Result<GradedModule> {
    Ok(GradedModule::free_rank_one(
        GradedAlgebra::truncated_polynomial(n)?,
        0,
    ))
}

/// Rank-1 module in degree d over the cohomology of a d-sphere, with
/// the fundamental class acting by zero (it lands beyond the top
/// degree).
pub fn sphere_model(d: usize) -> Result<GradedModule> {
    let algebra = GradedAlgebra::new(vec![Generator {
        name: "s".into(),
        degree: d.max(1),
        power_bound: 1,
    }])?;
    GradedModule::new(algebra, vec![d], vec![vec![Element::zero()]])
}

/// Index module of the product flow on T^2m x CP^n.
pub fn product_model(m: usize, n: usize) -> Result<GradedModule> {
    tensor_product(&torus_model(m)?, &proj_model(n)?)
}

/// Parses "torus m", "proj n", "sphere d", "product m n".
pub fn model_by_name(name: &str) -> Result<GradedModule> {
    let parts: Vec<&str> = name.split_whitespace().collect();
    let arg = |i: usize| -> Result<usize> {
        parts
            .get(i)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CoreError::InvalidParameter(format!("bad model spec: {name}")))
    };
    match parts.first().copied() {
        Some("torus") => torus_model(arg(1)?),
        Some("proj") => proj_model(arg(1)?),
        Some("sphere") => sphere_model(arg(1)?),
        Some("product") => product_model(arg(1)?, arg(2)?),
        _ => Err(CoreError::InvalidParameter(format!(
            "unknown model: {name}"
        ))),
    }
}

/// Alias matching the naming used by the graded types.
pub type ModuleModel = GradedModule;

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal search: the longest k with basis monomials
    /// b_1, ..., b_(k-1) of positive degree and a module basis element
    /// alpha with (b_1 ... b_(k-1)) . alpha != 0, enumerated by
    /// increasing chain length over monomials rather than generators.
    fn rcl_oracle(m: &GradedModule) -> usize {
        if m.is_zero() {
            return 0;
        }
        let alg = m.algebra();
        let monomials: Vec<usize> = (0..alg.basis_len())
            .filter(|&i| alg.basis_degree(i) > 0)
            .collect();
        let act_monomial = |i: usize, e: &Element| -> Element {
            let mut cur = e.clone();
            for (g, &count) in alg.basis_exponents(i).iter().enumerate() {
                for _ in 0..count {
                    cur = m.act_generator(g, &cur);
                }
            }
            cur
        };
        let mut frontier: Vec<Element> = (0..m.basis_degrees().len())
            .map(Element::singleton)
            .collect();
        let mut k = 1;
        loop {
            let mut next = Vec::new();
            for e in &frontier {
                for &i in &monomials {
                    let out = act_monomial(i, e);
                    if !out.is_zero() {
                        next.push(out);
                    }
                }
            }
            next.sort();
            next.dedup();
            if next.is_empty() {
                return k;
            }
            frontier = next;
            k += 1;
        }
    }

    #[test]
    fn cup_lengths_of_the_standard_algebras() {
        assert_eq!(GradedAlgebra::truncated_polynomial(2).unwrap().cup_length(), 2);
        assert_eq!(GradedAlgebra::exterior(2, "a").unwrap().cup_length(), 2);
        assert_eq!(GradedAlgebra::trivial().cup_length(), 0);
        for m in 1..=3 {
            assert_eq!(GradedAlgebra::exterior(2 * m, "a").unwrap().cup_length(), 2 * m);
        }
    }

    #[test]
    fn multiplication_is_truncated_and_commutative() {
        let alg = GradedAlgebra::exterior(3, "a").unwrap();
        let a = alg.monomial(&[1, 0, 0]).unwrap();
        let b = alg.monomial(&[0, 1, 1]).unwrap();
        let ab = alg.mul(&a, &b);
        assert_eq!(ab, alg.monomial(&[1, 1, 1]).unwrap());
        assert_eq!(alg.mul(&b, &a), ab);
        assert!(alg.mul(&a, &a).is_zero());
        let p = GradedAlgebra::truncated_polynomial(2).unwrap();
        let u = p.monomial(&[1]).unwrap();
        let u2 = p.mul(&u, &u);
        assert_eq!(u2, p.monomial(&[2]).unwrap());
        assert!(p.mul(&u, &u2).is_zero());
    }

    #[test]
    fn distributivity_over_f2() {
        let alg = GradedAlgebra::exterior(2, "a").unwrap();
        let a = alg.monomial(&[1, 0]).unwrap();
        let mut sum = alg.monomial(&[0, 1]).unwrap();
        sum.add_assign(&alg.unit());
        let lhs = alg.mul(&a, &sum);
        let mut rhs = alg.mul(&a, &alg.monomial(&[0, 1]).unwrap());
        rhs.add_assign(&alg.mul(&a, &alg.unit()));
        assert_eq!(lhs, rhs);
        // x + x = 0
        let mut twice = a.clone();
        twice.add_assign(&a);
        assert!(twice.is_zero());
    }

    #[test]
    fn model_cup_lengths_match_the_oracle() {
        for m in 1..=3 {
            let t = torus_model(m).unwrap();
            assert_eq!(relative_cup_length(&t), 2 * m + 1);
            assert_eq!(rcl_oracle(&t), 2 * m + 1);
        }
        for n in 1..=4 {
            let p = proj_model(n).unwrap();
            assert_eq!(relative_cup_length(&p), n + 1);
            assert_eq!(rcl_oracle(&p), n + 1);
        }
        for d in 1..=4 {
            let s = sphere_model(d).unwrap();
            assert_eq!(relative_cup_length(&s), 1);
            assert_eq!(rcl_oracle(&s), 1);
        }
    }

    #[test]
    fn zero_and_minimal_modules() {
        let z = GradedModule::zero_module(GradedAlgebra::exterior(2, "a").unwrap());
        assert_eq!(relative_cup_length(&z), 0);
        assert_eq!(rcl_oracle(&z), 0);
        let point = GradedModule::new(GradedAlgebra::trivial(), vec![0], vec![]).unwrap();
        assert_eq!(relative_cup_length(&point), 1);
    }

    #[test]
    fn product_rule_and_oracle() {
        for (m, n) in [(1, 1), (1, 2), (2, 1), (2, 3)] {
            let prod = product_model(m, n).unwrap();
            let rcl = relative_cup_length(&prod);
            assert_eq!(rcl, 2 * m + n + 2 - 1);
            if prod.algebra().basis_len() * prod.basis_degrees().len() <= 1 << 12 {
                assert_eq!(rcl_oracle(&prod), rcl);
            }
        }
        let spheres = tensor_product(&sphere_model(2).unwrap(), &sphere_model(3).unwrap()).unwrap();
        assert_eq!(relative_cup_length(&spheres), 1);
        let with_zero = tensor_product(
            &torus_model(1).unwrap(),
            &GradedModule::zero_module(GradedAlgebra::trivial()),
        )
        .unwrap();
        assert_eq!(relative_cup_length(&with_zero), 0);
    }

    #[test]
    fn suspension_preserves_relative_cup_length() {
        for shift in [0usize, 1, 4, 10] {
            assert_eq!(
                relative_cup_length(&torus_model(2).unwrap().suspend(shift)),
                5
            );
            assert_eq!(
                relative_cup_length(&proj_model(3).unwrap().suspend(shift)),
                4
            );
            assert_eq!(
                relative_cup_length(&sphere_model(3).unwrap().suspend(shift)),
                1
            );
        }
    }

    #[test]
    fn coefficient_restriction_cannot_increase_the_bound() {
        let t = torus_model(2).unwrap();
        let full = relative_cup_length(&t);
        for keep in [vec![0usize], vec![0, 1], vec![0, 1, 2], vec![0, 1, 2, 3]] {
            let restricted = t.restrict_to_subalgebra(&keep).unwrap();
            let r = relative_cup_length(&restricted);
            assert!(r <= full);
            assert_eq!(r, keep.len() + 1);
            assert_eq!(rcl_oracle(&restricted), r);
        }
    }

    #[test]
    fn cup_length_dominates_relative_cup_length_minus_one() {
        let models: Vec<GradedModule> = vec![
            torus_model(1).unwrap(),
            torus_model(3).unwrap(),
            proj_model(4).unwrap(),
            sphere_model(2).unwrap(),
            product_model(1, 1).unwrap(),
            product_model(2, 2).unwrap(),
        ];
        for m in &models {
            assert!(m.algebra().cup_length() >= relative_cup_length(m) - 1);
        }
    }

    #[test]
    fn hyperbolic_index_concentrates_in_the_unstable_degree() {
        let report = hyperbolic_conley_index(&[-1.0, -1.0, -1.0]).unwrap();
        assert_eq!(report.ranks, [(0usize, 1usize)].into_iter().collect());
        assert_eq!(report.rcl, 1);
        let report = hyperbolic_conley_index(&[1.0, -1.0]).unwrap();
        assert_eq!(report.ranks, [(1usize, 1usize)].into_iter().collect());
        let report = hyperbolic_conley_index(&[1.0; 4]).unwrap();
        assert_eq!(report.ranks, [(4usize, 1usize)].into_iter().collect());
        assert!(hyperbolic_conley_index(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn named_models_and_the_product_bound() {
        assert_eq!(
            rest_point_lower_bound(&model_by_name("product 1 1").unwrap()),
            4
        );
        assert_eq!(rest_point_lower_bound(&model_by_name("torus 2").unwrap()), 5);
        assert_eq!(rest_point_lower_bound(&model_by_name("proj 3").unwrap()), 4);
        assert_eq!(rest_point_lower_bound(&model_by_name("sphere 6").unwrap()), 1);
        assert!(model_by_name("klein 1").is_err());
        assert!(model_by_name("torus x").is_err());
    }
}
