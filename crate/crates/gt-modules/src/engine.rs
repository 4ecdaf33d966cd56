//! The three tableau module families and the action of `gl(n)`.
//!
//! * `FiniteDim`: highest-weight modules on standard tableaux with a fixed
//!   top row; non-standard targets are dropped.
//! * `Generic`: modules on shifted copies of a generic tableau, with the
//!   classical rational coefficients.
//! * `OneSingular`: modules attached to a 1-critical tableau, on the
//!   symmetric/antisymmetric basis. Every coefficient is read off a jet
//!   along the critical path: the `e^0` coefficient gives the reduced
//!   value, the `e^1` coefficient the derivative terms.
//!
//! Generators adjacent to the diagonal act by the displayed formulas;
//! arbitrary `E(a,b)` are derived through commutators, and the
//! Gelfand-Tsetlin generators `c_{m,t}` are sums over cyclic words of
//! generators.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::formulas::{
    eval_p, eval_q, eval_qstar, rat_p, rat_q, rat_rowsum, EvalContext, EvalOptions, Sign,
};
use crate::jet::Jet;
use crate::rat::Rat;
use crate::tableau::{classify, ShiftVector, SingularPair, Tableau};

/// A basis element of one of the module families.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisTag {
    /// Standard tableau of a finite-dimensional module.
    Std(Tableau),
    /// Shifted copy of the base point of a generic module.
    Gen(ShiftVector),
    /// Symmetrized basis element of a 1-singular module.
    Sym(ShiftVector),
    /// Antisymmetrized basis element of a 1-singular module.
    Alt(ShiftVector),
}

impl Serialize for BasisTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(tag = "kind")]
        enum Repr<'a> {
            Std { tableau: &'a Tableau },
            Gen { shift: &'a ShiftVector },
            Sym { shift: &'a ShiftVector },
            Alt { shift: &'a ShiftVector },
        }
        let repr = match self {
            BasisTag::Std(t) => Repr::Std { tableau: t },
            BasisTag::Gen(z) => Repr::Gen { shift: z },
            BasisTag::Sym(z) => Repr::Sym { shift: z },
            BasisTag::Alt(z) => Repr::Alt { shift: z },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BasisTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(tag = "kind")]
        enum Repr {
            Std { tableau: Tableau },
            Gen { shift: ShiftVector },
            Sym { shift: ShiftVector },
            Alt { shift: ShiftVector },
        }
        Ok(match Repr::deserialize(deserializer)? {
            Repr::Std { tableau } => BasisTag::Std(tableau),
            Repr::Gen { shift } => BasisTag::Gen(shift),
            Repr::Sym { shift } => BasisTag::Sym(shift),
            Repr::Alt { shift } => BasisTag::Alt(shift),
        })
    }
}

/// Which family a vector lives in, together with its defining data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModuleSpec {
    FiniteDim { lambda: Vec<i64> },
    Generic { tableau: Tableau },
    OneSingular { tableau: Tableau, pair: SingularPair },
}

impl ModuleSpec {
    /// A finite-dimensional module for a dominant integral weight.
    pub fn finite_dim(lambda: Vec<i64>) -> Result<Self> {
        if lambda.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "weight needs n >= 2 entries, got {}",
                lambda.len()
            )));
        }
        if lambda.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidSpec(format!(
                "weight {lambda:?} is not dominant (entries must be non-increasing)"
            )));
        }
        Ok(ModuleSpec::FiniteDim { lambda })
    }

    /// A generic module over a generic base tableau.
    pub fn generic(tableau: Tableau) -> Result<Self> {
        let c = classify(&tableau);
        if !c.generic {
            return Err(Error::InvalidSpec(format!(
                "base tableau {tableau:?} is not generic: singular pairs {:?}",
                c.singular_pairs
            )));
        }
        Ok(ModuleSpec::Generic { tableau })
    }

    /// A 1-singular module. The base tableau must be 1-singular with its
    /// single singular pair at `pair`; a non-critical representative is
    /// normalized by subtracting the integer difference from the `(k,i)`
    /// entry, which relabels the basis but does not change the module.
    pub fn one_singular(tableau: Tableau, pair: SingularPair) -> Result<Self> {
        SingularPair::new(pair.row, pair.i, pair.j, tableau.n())?;
        let c = classify(&tableau);
        if !c.is_1_singular {
            return Err(Error::InvalidSpec(format!(
                "base tableau {tableau:?} is not 1-singular: singular pairs {:?}",
                c.singular_pairs
            )));
        }
        if c.singular_pairs[0] != pair {
            return Err(Error::InvalidSpec(format!(
                "declared pair ({},{},{}) does not match the singular pair {:?}",
                pair.row, pair.i, pair.j, c.singular_pairs[0]
            )));
        }
        let mut tableau = tableau;
        let diff = tableau.entry(pair.row, pair.i) - tableau.entry(pair.row, pair.j);
        if !diff.is_zero() {
            let normalized = tableau.entry(pair.row, pair.i) - &diff;
            tableau.set_entry(pair.row, pair.i, normalized);
            debug_assert!(classify(&tableau).is_1_critical);
        }
        Ok(ModuleSpec::OneSingular { tableau, pair })
    }

    pub fn n(&self) -> usize {
        match self {
            ModuleSpec::FiniteDim { lambda } => lambda.len(),
            ModuleSpec::Generic { tableau } => tableau.n(),
            ModuleSpec::OneSingular { tableau, .. } => tableau.n(),
        }
    }

    fn revalidate(self) -> Result<Self> {
        match self {
            ModuleSpec::FiniteDim { lambda } => ModuleSpec::finite_dim(lambda),
            ModuleSpec::Generic { tableau } => ModuleSpec::generic(tableau),
            ModuleSpec::OneSingular { tableau, pair } => ModuleSpec::one_singular(tableau, pair),
        }
    }

    /// Checks a tag against the family and brings it to canonical form.
    /// Returns `None` for tags that denote the zero vector (an
    /// antisymmetric tag at a fixed shift).
    pub fn canonicalize_tag(&self, tag: BasisTag) -> Result<Option<(BasisTag, Rat)>> {
        match (self, tag) {
            (ModuleSpec::FiniteDim { lambda }, BasisTag::Std(t)) => {
                if t.n() != lambda.len() {
                    return Err(Error::SizeMismatch { expected: lambda.len(), got: t.n() });
                }
                let top = fd_top_row(lambda);
                for (s, expected) in top.iter().enumerate() {
                    if t.entry(t.n(), s + 1) != &Rat::from_int(*expected) {
                        return Err(Error::IncompatibleTag(format!(
                            "top row of {t:?} does not match the weight {lambda:?}"
                        )));
                    }
                }
                if !t.is_standard() {
                    return Err(Error::IncompatibleTag(format!("{t:?} is not standard")));
                }
                Ok(Some((BasisTag::Std(t), Rat::one())))
            }
            (ModuleSpec::Generic { tableau }, BasisTag::Gen(z)) => {
                if z.n() != tableau.n() {
                    return Err(Error::SizeMismatch { expected: tableau.n(), got: z.n() });
                }
                Ok(Some((BasisTag::Gen(z), Rat::one())))
            }
            (ModuleSpec::OneSingular { tableau, pair }, BasisTag::Sym(z)) => {
                if z.n() != tableau.n() {
                    return Err(Error::SizeMismatch { expected: tableau.n(), got: z.n() });
                }
                if z.entry(pair.row, pair.i) >= z.entry(pair.row, pair.j) {
                    Ok(Some((BasisTag::Sym(z), Rat::one())))
                } else {
                    Ok(Some((BasisTag::Sym(z.tau_apply(pair)), Rat::one())))
                }
            }
            (ModuleSpec::OneSingular { tableau, pair }, BasisTag::Alt(z)) => {
                if z.n() != tableau.n() {
                    return Err(Error::SizeMismatch { expected: tableau.n(), got: z.n() });
                }
                if z.is_tau_fixed(pair) {
                    Ok(None)
                } else if z.entry(pair.row, pair.i) > z.entry(pair.row, pair.j) {
                    Ok(Some((BasisTag::Alt(z), Rat::one())))
                } else {
                    Ok(Some((BasisTag::Alt(z.tau_apply(pair)), -Rat::one())))
                }
            }
            (_, tag) => Err(Error::IncompatibleTag(format!(
                "tag {tag:?} does not belong to this family"
            ))),
        }
    }
}

impl Serialize for ModuleSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(tag = "family", rename_all = "snake_case")]
        enum Repr<'a> {
            FiniteDim { lambda: &'a [i64] },
            Generic { tableau: &'a Tableau },
            OneSingular { tableau: &'a Tableau, pair: &'a SingularPair },
        }
        let repr = match self {
            ModuleSpec::FiniteDim { lambda } => Repr::FiniteDim { lambda },
            ModuleSpec::Generic { tableau } => Repr::Generic { tableau },
            ModuleSpec::OneSingular { tableau, pair } => Repr::OneSingular { tableau, pair },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ModuleSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
        enum Repr {
            FiniteDim { lambda: Vec<i64> },
            Generic { tableau: Tableau },
            OneSingular { tableau: Tableau, pair: SingularPair },
        }
        let spec = match Repr::deserialize(deserializer)? {
            Repr::FiniteDim { lambda } => ModuleSpec::FiniteDim { lambda },
            Repr::Generic { tableau } => ModuleSpec::Generic { tableau },
            Repr::OneSingular { tableau, pair } => ModuleSpec::OneSingular { tableau, pair },
        };
        spec.revalidate().map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// A finite rational linear combination of basis tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleVector {
    spec: ModuleSpec,
    terms: BTreeMap<BasisTag, Rat>,
}

impl ModuleVector {
    pub fn zero(spec: ModuleSpec) -> Self {
        ModuleVector { spec, terms: BTreeMap::new() }
    }

    /// The basis vector for a tag (the zero vector for an antisymmetric
    /// tag at a fixed shift).
    pub fn basis(spec: ModuleSpec, tag: BasisTag) -> Result<Self> {
        let mut v = ModuleVector::zero(spec);
        v.add_term(tag, Rat::one())?;
        Ok(v)
    }

    pub fn from_terms(
        spec: ModuleSpec,
        terms: impl IntoIterator<Item = (BasisTag, Rat)>,
    ) -> Result<Self> {
        let mut v = ModuleVector::zero(spec);
        for (tag, coeff) in terms {
            v.add_term(tag, coeff)?;
        }
        Ok(v)
    }

    /// Adds `coeff * tag`, canonicalizing the tag and dropping zeros.
    pub fn add_term(&mut self, tag: BasisTag, coeff: Rat) -> Result<()> {
        if coeff.is_zero() {
            // still validate the tag so malformed input cannot hide
            self.spec.canonicalize_tag(tag)?;
            return Ok(());
        }
        if let Some((tag, sign)) = self.spec.canonicalize_tag(tag)? {
            let entry = self.terms.entry(tag);
            let entry = entry.or_insert_with(Rat::zero);
            *entry += &(coeff * sign);
            if entry.is_zero() {
                // re-borrow to remove; find the key via retain
                self.terms.retain(|_, c| !c.is_zero());
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &ModuleSpec {
        &self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisTag, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, tag: &BasisTag) -> Rat {
        self.terms.get(tag).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn scale(&self, factor: &Rat) -> ModuleVector {
        if factor.is_zero() {
            return ModuleVector::zero(self.spec.clone());
        }
        let terms = self
            .terms
            .iter()
            .map(|(tag, c)| (tag.clone(), c * factor))
            .collect();
        ModuleVector { spec: self.spec.clone(), terms }
    }

    pub fn add(&self, other: &ModuleVector) -> Result<ModuleVector> {
        if self.spec != other.spec {
            return Err(Error::InvalidSpec(
                "cannot combine vectors from different module specs".into(),
            ));
        }
        let mut terms = self.terms.clone();
        for (tag, c) in &other.terms {
            let entry = terms.entry(tag.clone()).or_insert_with(Rat::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(ModuleVector { spec: self.spec.clone(), terms })
    }

    pub fn sub(&self, other: &ModuleVector) -> Result<ModuleVector> {
        self.add(&other.scale(&-Rat::one()))
    }
}

impl Serialize for ModuleVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            tag: &'a BasisTag,
            coeff: &'a Rat,
        }
        #[derive(Serialize)]
        struct Repr<'a> {
            spec: &'a ModuleSpec,
            terms: Vec<Term<'a>>,
        }
        let terms = self.terms.iter().map(|(tag, coeff)| Term { tag, coeff }).collect();
        Repr { spec: &self.spec, terms }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ModuleVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Term {
            tag: BasisTag,
            coeff: Rat,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            spec: ModuleSpec,
            terms: Vec<Term>,
        }
        let repr = Repr::deserialize(deserializer)?;
        ModuleVector::from_terms(repr.spec, repr.terms.into_iter().map(|t| (t.tag, t.coeff)))
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// The generator `E(a,b)` of `gl(n)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub a: usize,
    pub b: usize,
}

impl Generator {
    pub fn e(a: usize, b: usize) -> Generator {
        Generator { a, b }
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E({},{})", self.a, self.b)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E({},{})", self.a, self.b)
    }
}

type Terms = BTreeMap<BasisTag, Rat>;

/// Applies generators of `U(gl(n))` to vectors of one module. Results for
/// single tags are memoized, which makes the word sums of the
/// Gelfand-Tsetlin generators affordable.
pub struct Engine {
    spec: ModuleSpec,
    opts: EvalOptions,
    cache: RefCell<HashMap<(Generator, BasisTag), Terms>>,
}

impl Engine {
    pub fn new(spec: ModuleSpec, opts: EvalOptions) -> Result<Self> {
        let spec = spec.revalidate()?;
        Ok(Engine { spec, opts, cache: RefCell::new(HashMap::new()) })
    }

    pub fn with_defaults(spec: ModuleSpec) -> Result<Self> {
        Engine::new(spec, EvalOptions::default())
    }

    pub fn spec(&self) -> &ModuleSpec {
        &self.spec
    }

    pub fn options(&self) -> &EvalOptions {
        &self.opts
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn basis_vector(&self, tag: BasisTag) -> Result<ModuleVector> {
        ModuleVector::basis(self.spec.clone(), tag)
    }

    fn check_generator(&self, gen: Generator) -> Result<()> {
        let n = self.n();
        if gen.a < 1 || gen.a > n || gen.b < 1 || gen.b > n {
            return Err(Error::InvalidGenerator { a: gen.a, b: gen.b, n });
        }
        Ok(())
    }

    /// Applies `E(a,b)` to a vector. Generators at distance > 1 from the
    /// diagonal unfold as `E(a,b) = [E(a,m), E(m,b)]` with `m` the
    /// intermediate index adjacent to `b`.
    pub fn act(&self, gen: Generator, vec: &ModuleVector) -> Result<ModuleVector> {
        self.check_generator(gen)?;
        if vec.spec != self.spec {
            return Err(Error::InvalidSpec(
                "vector does not belong to this engine's module".into(),
            ));
        }
        let terms = self.act_terms(gen, &vec.terms)?;
        Ok(ModuleVector { spec: self.spec.clone(), terms })
    }

    /// Applies the Gelfand-Tsetlin generator `c_{m,t}`: the sum over all
    /// `m^t` cyclic words `E(i1,i2) E(i2,i3) ... E(it,i1)`, rightmost
    /// factor first. Shared word suffixes are folded into layers so the
    /// cost grows with `m^2 t` vector operations instead of `m^t`.
    pub fn act_casimir(&self, m: usize, t: usize, vec: &ModuleVector) -> Result<ModuleVector> {
        if !(1 <= t && t <= m && m <= self.n()) {
            return Err(Error::InvalidSpec(format!(
                "Casimir indices need 1 <= t <= m <= n, got (m,t)=({m},{t}), n={}",
                self.n()
            )));
        }
        if vec.spec != self.spec {
            return Err(Error::InvalidSpec(
                "vector does not belong to this engine's module".into(),
            ));
        }
        let mut result: Terms = BTreeMap::new();
        for c in 1..=m {
            if t == 1 {
                merge_scaled(&mut result, &self.act_terms(Generator::e(c, c), &vec.terms)?, &Rat::one());
                continue;
            }
            // layer[j-1] accumulates all suffixes ending in E(j, .) ... E(., c)
            let mut layer: Vec<Terms> = Vec::with_capacity(m);
            for j in 1..=m {
                layer.push(self.act_terms(Generator::e(j, c), &vec.terms)?);
            }
            for _ in 0..t.saturating_sub(2) {
                let mut next: Vec<Terms> = Vec::with_capacity(m);
                for j in 1..=m {
                    let mut acc: Terms = BTreeMap::new();
                    for (jp, suffix) in layer.iter().enumerate() {
                        let _ = jp;
                        merge_scaled(
                            &mut acc,
                            &self.act_terms(Generator::e(j, jp + 1), suffix)?,
                            &Rat::one(),
                        );
                    }
                    next.push(acc);
                }
                layer = next;
            }
            for (j, suffix) in layer.iter().enumerate() {
                merge_scaled(
                    &mut result,
                    &self.act_terms(Generator::e(c, j + 1), suffix)?,
                    &Rat::one(),
                );
            }
        }
        Ok(ModuleVector { spec: self.spec.clone(), terms: result })
    }

    /// The eigenvalue of the diagonal generator `E(t,t)` on a tag.
    pub fn weight(&self, tag: &BasisTag, t: usize) -> Result<Rat> {
        self.check_generator(Generator::e(t, t))?;
        let point = self.tag_point(tag)?;
        let prev = if t == 1 { Rat::zero() } else { rat_rowsum(&point, t - 1) };
        Ok(rat_rowsum(&point, t) - prev + Rat::from_int(t as i64 - 1))
    }

    /// The raw coefficient jets behind one generator application in the
    /// 1-singular family, for regularity audits.
    pub fn one_singular_coefficient_jets(
        &self,
        gen: Generator,
        tag: &BasisTag,
    ) -> Result<Vec<Jet>> {
        self.check_generator(gen)?;
        if gen.a.abs_diff(gen.b) != 1 {
            return Err(Error::InvalidSpec(
                "coefficient jets are defined for the generators adjacent to the diagonal".into(),
            ));
        }
        let (_, jets) = self.one_singular_action(gen, tag)?;
        Ok(jets)
    }

    fn act_terms(&self, gen: Generator, terms: &Terms) -> Result<Terms> {
        let mut acc: Terms = BTreeMap::new();
        for (tag, coeff) in terms {
            let moved = self.act_tag(gen, tag)?;
            merge_scaled(&mut acc, &moved, coeff);
        }
        Ok(acc)
    }

    fn act_tag(&self, gen: Generator, tag: &BasisTag) -> Result<Terms> {
        let key = (gen, tag.clone());
        if let Some(hit) = self.cache.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let computed = if gen.a.abs_diff(gen.b) <= 1 {
            self.chevalley_tag(gen, tag)?
        } else {
            // E(a,b) = [E(a,m), E(m,b)], m adjacent to b
            let m = if gen.a < gen.b { gen.b - 1 } else { gen.b + 1 };
            let first = Generator::e(gen.a, m);
            let second = Generator::e(m, gen.b);
            let via_second = self.act_terms(first, &self.act_tag(second, tag)?)?;
            let via_first = self.act_terms(second, &self.act_tag(first, tag)?)?;
            let mut out = via_second;
            merge_scaled(&mut out, &via_first, &-Rat::one());
            out
        };
        self.cache.borrow_mut().insert(key, computed.clone());
        Ok(computed)
    }

    fn chevalley_tag(&self, gen: Generator, tag: &BasisTag) -> Result<Terms> {
        if gen.a == gen.b {
            let w = self.weight(tag, gen.a)?;
            let mut terms = BTreeMap::new();
            if !w.is_zero() {
                terms.insert(tag.clone(), w);
            }
            return Ok(terms);
        }
        match (&self.spec, tag) {
            (ModuleSpec::FiniteDim { .. }, BasisTag::Std(t)) => self.finite_dim_step(gen, t),
            (ModuleSpec::Generic { tableau }, BasisTag::Gen(z)) => {
                self.generic_step(gen, tableau, z)
            }
            (ModuleSpec::OneSingular { .. }, BasisTag::Sym(_) | BasisTag::Alt(_)) => {
                Ok(self.one_singular_action(gen, tag)?.0)
            }
            _ => Err(Error::IncompatibleTag(format!(
                "tag {tag:?} does not belong to this family"
            ))),
        }
    }

    fn finite_dim_step(&self, gen: Generator, t: &Tableau) -> Result<Terms> {
        let (row, sign, dir, overall) = self.step_data(gen);
        let mut terms = BTreeMap::new();
        for s in 1..=row {
            let p = rat_p(t, sign, row, s, &self.opts)?;
            let q = rat_q(t, row, s)?;
            let coeff = &overall * &p.checked_div(&q)?;
            if coeff.is_zero() {
                continue;
            }
            let target = t.bump(row, s, dir);
            if !target.is_standard() {
                // dropped by convention: non-standard tableaux are zero
                continue;
            }
            insert_term(&mut terms, BasisTag::Std(target), coeff);
        }
        Ok(terms)
    }

    fn generic_step(&self, gen: Generator, v: &Tableau, z: &ShiftVector) -> Result<Terms> {
        let (row, sign, dir, overall) = self.step_data(gen);
        let w = v.apply_shift(z)?;
        let mut terms = BTreeMap::new();
        for s in 1..=row {
            let p = rat_p(&w, sign, row, s, &self.opts)?;
            let q = rat_q(&w, row, s)?;
            let coeff = &overall * &p.checked_div(&q)?;
            if coeff.is_zero() {
                continue;
            }
            insert_term(&mut terms, BasisTag::Gen(z.bump(row, s, dir)), coeff);
        }
        Ok(terms)
    }

    /// The reduced action on the symmetric/antisymmetric basis. Every
    /// coefficient is a jet along the critical path; the returned jets are
    /// the raw quotients backing the coefficients, in the order they were
    /// read.
    fn one_singular_action(&self, gen: Generator, tag: &BasisTag) -> Result<(Terms, Vec<Jet>)> {
        let (tableau, pair) = match &self.spec {
            ModuleSpec::OneSingular { tableau, pair } => (tableau, *pair),
            _ => unreachable!("one_singular_action called on another family"),
        };
        if gen.a == gen.b {
            let w = self.weight(tag, gen.a)?;
            let mut terms = BTreeMap::new();
            if !w.is_zero() {
                terms.insert(tag.clone(), w);
            }
            return Ok((terms, Vec::new()));
        }
        let (row, sign, dir, overall) = self.step_data(gen);
        let (z, is_sym) = match tag {
            BasisTag::Sym(z) => (z, true),
            BasisTag::Alt(z) => (z, false),
            _ => {
                return Err(Error::IncompatibleTag(format!(
                    "tag {tag:?} does not belong to this family"
                )))
            }
        };
        let ctx = EvalContext::new(tableau.clone(), z.clone(), Some(pair), self.opts)?;
        let mut terms = BTreeMap::new();
        let mut jets = Vec::new();
        let push = |terms: &mut Terms, tag: BasisTag, coeff: Rat| -> Result<()> {
            if coeff.is_zero() {
                return Ok(());
            }
            if let Some((tag, extra)) = self.spec.canonicalize_tag(tag)? {
                insert_term(terms, tag, coeff * extra);
            }
            Ok(())
        };
        let regular = |jet: Jet, what: &str| -> Result<Jet> {
            if jet.is_regular() {
                Ok(jet)
            } else {
                Err(Error::IrregularCoefficient { context: what.to_string(), jet: jet.to_string() })
            }
        };

        if is_sym && row == pair.row && z.is_tau_fixed(&pair) {
            for s in 1..=row {
                if s == pair.i || s == pair.j {
                    continue;
                }
                let f = eval_p(&ctx, sign, row, s)?.div(&eval_q(&ctx, row, s)?, self.opts.floor)?;
                let f = regular(f, "plain coefficient on the singular row")?;
                let c = &overall * &f.coeff(0)?;
                push(&mut terms, BasisTag::Sym(z.bump(row, s, dir)), c)?;
                jets.push(f);
            }
            // the two pair columns collapse into one target; the factor 2
            // accounts for the identified tags
            let f = eval_p(&ctx, sign, row, pair.i)?
                .div(&eval_qstar(&ctx, row, pair.i)?, self.opts.floor)?;
            let f = regular(f, "pair coefficient p/q* at a fixed shift")?;
            let two = Rat::from_int(2);
            let d_part = &(&overall * &two) * &f.coeff(1)?;
            let a_part = &(&overall * &two) * &f.coeff(0)?;
            let target = z.bump(row, pair.i, dir);
            push(&mut terms, BasisTag::Sym(target.clone()), d_part)?;
            push(&mut terms, BasisTag::Alt(target), a_part)?;
            jets.push(f);
        } else {
            for s in 1..=row {
                let f = eval_p(&ctx, sign, row, s)?.div(&eval_q(&ctx, row, s)?, self.opts.floor)?;
                let f = regular(f, "reduced coefficient")?;
                let target = z.bump(row, s, dir);
                if is_sym {
                    push(&mut terms, BasisTag::Sym(target), &overall * &f.coeff(0)?)?;
                } else {
                    push(&mut terms, BasisTag::Sym(target.clone()), &overall * &f.coeff(1)?)?;
                    push(&mut terms, BasisTag::Alt(target), &overall * &f.coeff(0)?)?;
                }
                jets.push(f);
            }
        }
        Ok((terms, jets))
    }

    /// Row, product sign, shift direction and overall sign of an
    /// off-diagonal Chevalley generator.
    fn step_data(&self, gen: Generator) -> (usize, Sign, i64, Rat) {
        if gen.b == gen.a + 1 {
            (gen.a, Sign::Plus, 1, self.opts.raise_sign())
        } else {
            debug_assert_eq!(gen.a, gen.b + 1);
            (gen.b, Sign::Minus, -1, Rat::one())
        }
    }

    /// The tableau whose rows feed the weight formula for a tag.
    fn tag_point(&self, tag: &BasisTag) -> Result<Tableau> {
        match (&self.spec, tag) {
            (ModuleSpec::FiniteDim { .. }, BasisTag::Std(t)) => Ok(t.clone()),
            (ModuleSpec::Generic { tableau }, BasisTag::Gen(z)) => tableau.apply_shift(z),
            (
                ModuleSpec::OneSingular { tableau, .. },
                BasisTag::Sym(z) | BasisTag::Alt(z),
            ) => tableau.apply_shift(z),
            _ => Err(Error::IncompatibleTag(format!(
                "tag {tag:?} does not belong to this family"
            ))),
        }
    }
}

fn insert_term(terms: &mut Terms, tag: BasisTag, coeff: Rat) {
    if coeff.is_zero() {
        return;
    }
    let entry = terms.entry(tag).or_insert_with(Rat::zero);
    *entry += &coeff;
    if entry.is_zero() {
        terms.retain(|_, c| !c.is_zero());
    }
}

fn merge_scaled(acc: &mut Terms, incoming: &Terms, factor: &Rat) {
    if factor.is_zero() {
        return;
    }
    for (tag, c) in incoming {
        insert_term(acc, tag.clone(), c * factor);
    }
}

/// Top row of the standard tableaux of the module with highest weight
/// `lambda`: the weight staircase `lambda_s - s + 1`.
pub fn fd_top_row(lambda: &[i64]) -> Vec<i64> {
    lambda.iter().enumerate().map(|(idx, l)| l - idx as i64).collect()
}

/// Enumerates the standard tableaux with the top row determined by a
/// dominant integral weight, in lexicographic order.
pub fn fd_basis(lambda: &[i64]) -> Result<Vec<Tableau>> {
    ModuleSpec::finite_dim(lambda.to_vec())?;
    let n = lambda.len();
    let top = fd_top_row(lambda);
    let mut out: Vec<Vec<Vec<i64>>> = vec![vec![top.clone()]];
    // peel rows downward; each entry ranges between its upper neighbours
    for row in (1..n).rev() {
        let mut next: Vec<Vec<Vec<i64>>> = Vec::new();
        for partial in &out {
            let above = partial.last().expect("at least the top row");
            let mut choices: Vec<Vec<i64>> = vec![Vec::new()];
            for s in 1..=row {
                let hi = above[s - 1];
                let lo = above[s] + 1;
                let mut grown = Vec::new();
                for c in &choices {
                    for val in lo..=hi {
                        let mut c2 = c.clone();
                        c2.push(val);
                        grown.push(c2);
                    }
                }
                choices = grown;
                if choices.is_empty() {
                    break;
                }
            }
            for c in choices {
                let mut p2 = partial.clone();
                p2.push(c);
                next.push(p2);
            }
        }
        out = next;
    }
    let mut tableaux = Vec::with_capacity(out.len());
    for rows_top_first in out {
        let rows = rows_top_first
            .into_iter()
            .map(|row| row.into_iter().map(Rat::from_int).collect())
            .collect();
        tableaux.push(Tableau::from_rows_top_first(rows)?);
    }
    tableaux.sort();
    debug_assert!(tableaux.iter().all(|t| t.is_standard()));
    Ok(tableaux)
}

/// Dimension of the module with highest weight `lambda` by the product
/// formula over positive roots; the independent oracle for `fd_basis`.
pub fn weyl_dim(lambda: &[i64]) -> Result<u64> {
    ModuleSpec::finite_dim(lambda.to_vec())?;
    let n = lambda.len();
    let mut dim = Rat::one();
    for a in 0..n {
        for b in (a + 1)..n {
            let num = Rat::from_int(lambda[a] - lambda[b] + (b - a) as i64);
            let den = Rat::from_int((b - a) as i64);
            dim *= &num.checked_div(&den)?;
        }
    }
    dim.to_i64()
        .and_then(|d| u64::try_from(d).ok())
        .ok_or_else(|| Error::InvalidSpec("dimension formula did not yield an integer".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn tab(rows_top_first: &[&[&str]]) -> Tableau {
        let rows = rows_top_first
            .iter()
            .map(|row| row.iter().map(|s| rat(s)).collect())
            .collect();
        Tableau::from_rows_top_first(rows).unwrap()
    }

    fn shift(n: usize, entries: &[(usize, usize, i64)]) -> ShiftVector {
        let mut z = ShiftVector::zero(n).unwrap();
        for &(row, col, val) in entries {
            z.set_entry(row, col, val);
        }
        z
    }

    fn gl2_fd() -> Engine {
        Engine::with_defaults(ModuleSpec::finite_dim(vec![1, 0]).unwrap()).unwrap()
    }

    fn gl3_singular() -> Engine {
        let v = tab(&[&["2", "0", "-2"], &["1", "1"], &["1"]]);
        let pair = SingularPair::new(2, 1, 2, 3).unwrap();
        Engine::with_defaults(ModuleSpec::one_singular(v, pair).unwrap()).unwrap()
    }

    #[test]
    fn finite_dim_raising_by_hand() {
        let engine = gl2_fd();
        let start = engine
            .basis_vector(BasisTag::Std(tab(&[&["1", "-1"], &["0"]])))
            .unwrap();
        let raised = engine.act(Generator::e(1, 2), &start).unwrap();
        let expected = engine
            .basis_vector(BasisTag::Std(tab(&[&["1", "-1"], &["1"]])))
            .unwrap();
        assert_eq!(raised, expected);

        // raising the highest tableau falls off the module
        let top = engine
            .basis_vector(BasisTag::Std(tab(&[&["1", "-1"], &["1"]])))
            .unwrap();
        assert!(engine.act(Generator::e(1, 2), &top).unwrap().is_zero());
    }

    #[test]
    fn finite_dim_diagonal_by_hand() {
        let engine = gl2_fd();
        let t = engine
            .basis_vector(BasisTag::Std(tab(&[&["1", "-1"], &["0"]])))
            .unwrap();
        let acted = engine.act(Generator::e(2, 2), &t).unwrap();
        assert_eq!(acted, t.scale(&Rat::one()));
        let tag = BasisTag::Std(tab(&[&["1", "-1"], &["0"]]));
        assert_eq!(engine.weight(&tag, 2).unwrap(), Rat::one());
        assert_eq!(engine.weight(&tag, 1).unwrap(), Rat::zero());
    }

    #[test]
    fn generic_raising_by_hand() {
        let v = tab(&[&["1", "-1"], &["1/2"]]);
        let engine = Engine::with_defaults(ModuleSpec::generic(v).unwrap()).unwrap();
        let start = engine
            .basis_vector(BasisTag::Gen(ShiftVector::zero(2).unwrap()))
            .unwrap();
        let raised = engine.act(Generator::e(1, 2), &start).unwrap();
        let target = BasisTag::Gen(shift(2, &[(1, 1, 1)]));
        assert_eq!(raised.coeff(&target), rat("3/4"));
        assert_eq!(raised.len(), 1);
    }

    #[test]
    fn one_singular_base_cases() {
        let engine = gl3_singular();
        let zero_shift = ShiftVector::zero(3).unwrap();

        // an antisymmetric tag at a fixed shift is the zero vector
        let alt = engine.basis_vector(BasisTag::Alt(zero_shift.clone())).unwrap();
        assert!(alt.is_zero());

        // E(1,1) acts with eigenvalue 1 on Sym(0)
        let sym = engine.basis_vector(BasisTag::Sym(zero_shift.clone())).unwrap();
        let acted = engine.act(Generator::e(1, 1), &sym).unwrap();
        assert_eq!(acted, sym);

        // E(1,2) kills Sym(0): the coefficient vanishes at the double point
        let raised = engine.act(Generator::e(1, 2), &sym).unwrap();
        assert!(raised.is_zero());
    }

    #[test]
    fn one_singular_pair_row_action() {
        let engine = gl3_singular();
        let sym = engine
            .basis_vector(BasisTag::Sym(ShiftVector::zero(3).unwrap()))
            .unwrap();
        let raised = engine.act(Generator::e(2, 3), &sym).unwrap();
        // targets: the identified pair shift and an antisymmetric partner
        let sym_target = BasisTag::Sym(shift(3, &[(2, 1, 1)]));
        let alt_target = BasisTag::Alt(shift(3, &[(2, 1, 1)]));
        assert!(!raised.coeff(&alt_target).is_zero() || !raised.coeff(&sym_target).is_zero());
        for jet in engine
            .one_singular_coefficient_jets(Generator::e(2, 3), &BasisTag::Sym(ShiftVector::zero(3).unwrap()))
            .unwrap()
        {
            assert!(jet.is_regular());
        }
    }

    #[test]
    fn tag_canonicalization_under_tau() {
        let engine = gl3_singular();
        let z = shift(3, &[(2, 1, 1)]);
        let pair = SingularPair::new(2, 1, 2, 3).unwrap();
        let tz = z.tau_apply(&pair);

        let sym_a = engine.basis_vector(BasisTag::Sym(z.clone())).unwrap();
        let sym_b = engine.basis_vector(BasisTag::Sym(tz.clone())).unwrap();
        assert_eq!(sym_a, sym_b);

        let alt_a = engine.basis_vector(BasisTag::Alt(z)).unwrap();
        let alt_b = engine.basis_vector(BasisTag::Alt(tz)).unwrap();
        assert!(alt_a.add(&alt_b).unwrap().is_zero());
    }

    #[test]
    fn commutator_route_matches_composition() {
        // E(1,3) = [E(1,2), E(2,3)] by definition of the derived generators
        let v = tab(&[&["3", "1", "0"], &["1/2", "-2/3"], &["1/5"]]);
        let engine = Engine::with_defaults(ModuleSpec::generic(v).unwrap()).unwrap();
        let start = engine
            .basis_vector(BasisTag::Gen(ShiftVector::zero(3).unwrap()))
            .unwrap();
        let direct = engine.act(Generator::e(1, 3), &start).unwrap();
        let ab = engine
            .act(Generator::e(1, 2), &engine.act(Generator::e(2, 3), &start).unwrap())
            .unwrap();
        let ba = engine
            .act(Generator::e(2, 3), &engine.act(Generator::e(1, 2), &start).unwrap())
            .unwrap();
        assert_eq!(direct, ab.sub(&ba).unwrap());
    }

    #[test]
    fn lowering_chain_matches_commutator_on_finite_dim() {
        let engine =
            Engine::with_defaults(ModuleSpec::finite_dim(vec![1, 0, 0]).unwrap()).unwrap();
        let highest = engine
            .basis_vector(BasisTag::Std(tab(&[&["1", "-1", "-2"], &["1", "-1"], &["1"]])))
            .unwrap();
        let direct = engine.act(Generator::e(3, 1), &highest).unwrap();
        let ab = engine
            .act(Generator::e(3, 2), &engine.act(Generator::e(2, 1), &highest).unwrap())
            .unwrap();
        let ba = engine
            .act(Generator::e(2, 1), &engine.act(Generator::e(3, 2), &highest).unwrap())
            .unwrap();
        assert_eq!(direct, ab.sub(&ba).unwrap());
        assert!(!direct.is_zero());
    }

    #[test]
    fn casimir_words_by_hand() {
        // c_{1,1} = E(1,1)
        let v = tab(&[&["1", "-1"], &["1/2"]]);
        let engine = Engine::with_defaults(ModuleSpec::generic(v).unwrap()).unwrap();
        let start = engine
            .basis_vector(BasisTag::Gen(ShiftVector::zero(2).unwrap()))
            .unwrap();
        let c11 = engine.act_casimir(1, 1, &start).unwrap();
        assert_eq!(c11, start.scale(&rat("1/2")));

        // c_{2,1} acts by the linear row invariant
        let c21 = engine.act_casimir(2, 1, &start).unwrap();
        assert_eq!(c21, start.scale(&Rat::one()));

        // c_{2,2} against the explicit four-word sum
        let c22 = engine.act_casimir(2, 2, &start).unwrap();
        let mut by_words = ModuleVector::zero(engine.spec().clone());
        for (x, y) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let inner = engine.act(Generator::e(y, x), &start).unwrap();
            let outer = engine.act(Generator::e(x, y), &inner).unwrap();
            by_words = by_words.add(&outer).unwrap();
        }
        assert_eq!(c22, by_words);
    }

    #[test]
    fn casimir_block_on_singular_alt_tag() {
        // c_{2,2} on Alt(z) with row-2 shift (1,0) picks up exactly one
        // symmetric term
        let engine = gl3_singular();
        let z = shift(3, &[(2, 1, 1)]);
        let alt = engine.basis_vector(BasisTag::Alt(z.clone())).unwrap();
        let acted = engine.act_casimir(2, 2, &alt).unwrap();

        let w = engine.spec().n();
        assert_eq!(w, 3);
        let gamma = crate::formulas::rat_gamma(
            &tab(&[&["2", "0", "-2"], &["2", "1"], &["1"]]),
            2,
            2,
            engine.options(),
        )
        .unwrap();
        let expected = alt
            .scale(&gamma)
            .add(&engine.basis_vector(BasisTag::Sym(z)).unwrap())
            .unwrap();
        assert_eq!(acted, expected);
    }

    #[test]
    fn fd_basis_and_dimensions() {
        let basis = fd_basis(&[1, 0]).unwrap();
        assert_eq!(basis.len(), 2);
        assert_eq!(basis[0], tab(&[&["1", "-1"], &["0"]]));
        assert_eq!(basis[1], tab(&[&["1", "-1"], &["1"]]));

        assert_eq!(fd_basis(&[0, 0, 0]).unwrap().len(), 1);
        assert_eq!(fd_basis(&[1, 0, 0]).unwrap().len(), 3);

        assert_eq!(weyl_dim(&[1, 0]).unwrap(), 2);
        assert_eq!(weyl_dim(&[0, 0, 0]).unwrap(), 1);
        assert_eq!(weyl_dim(&[1, 0, 0]).unwrap(), 3);
        assert_eq!(weyl_dim(&[2, 1, 0]).unwrap(), 8);

        assert!(fd_basis(&[0, 1]).is_err());
    }

    #[test]
    fn finite_dim_closure_and_support() {
        let engine =
            Engine::with_defaults(ModuleSpec::finite_dim(vec![2, 1, 0]).unwrap()).unwrap();
        let basis = fd_basis(&[2, 1, 0]).unwrap();
        assert_eq!(basis.len(), 8);
        let top = fd_top_row(&[2, 1, 0]);
        for t in &basis {
            let vec = engine.basis_vector(BasisTag::Std(t.clone())).unwrap();
            for (a, b) in [(1, 2), (2, 3), (2, 1), (3, 2)] {
                let acted = engine.act(Generator::e(a, b), &vec).unwrap();
                for (tag, _) in acted.terms() {
                    let BasisTag::Std(img) = tag else { panic!("non-standard tag") };
                    assert!(img.is_standard());
                    for (s, expected) in top.iter().enumerate() {
                        assert_eq!(img.entry(3, s + 1), &Rat::from_int(*expected));
                    }
                }
            }
        }
    }

    #[test]
    fn weight_grading_shifts_by_one() {
        let v = tab(&[&["3", "1", "0"], &["1/2", "-2/3"], &["1/5"]]);
        let engine = Engine::with_defaults(ModuleSpec::generic(v).unwrap()).unwrap();
        let z = ShiftVector::zero(3).unwrap();
        let tag = BasisTag::Gen(z.clone());
        let start = engine.basis_vector(tag.clone()).unwrap();
        for t in 1..=2 {
            let before_t = engine.weight(&tag, t).unwrap();
            let before_t1 = engine.weight(&tag, t + 1).unwrap();
            let raised = engine.act(Generator::e(t, t + 1), &start).unwrap();
            for (img, _) in raised.terms() {
                assert_eq!(engine.weight(img, t).unwrap(), &before_t + &Rat::one());
                assert_eq!(engine.weight(img, t + 1).unwrap(), &before_t1 - &Rat::one());
            }
        }
    }

    #[test]
    fn one_singular_normalization() {
        // a 1-singular non-critical tableau is shifted to its critical
        // representative
        let v = tab(&[&["2", "0", "-2"], &["3", "1"], &["1"]]);
        let pair = SingularPair::new(2, 1, 2, 3).unwrap();
        let spec = ModuleSpec::one_singular(v, pair).unwrap();
        let ModuleSpec::OneSingular { tableau, .. } = &spec else { unreachable!() };
        assert_eq!(tableau.entry(2, 1), &Rat::one());
        assert_eq!(tableau.entry(2, 2), &Rat::one());
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(ModuleSpec::finite_dim(vec![0, 1]).is_err());
        let v = tab(&[&["2", "0", "-2"], &["1", "1"], &["1"]]);
        assert!(ModuleSpec::generic(v.clone()).is_err());
        let bad_pair = SingularPair::new(1, 1, 2, 4);
        assert!(bad_pair.is_err());

        let engine = gl2_fd();
        let bad_gen = engine.act(
            Generator::e(2, 3),
            &engine
                .basis_vector(BasisTag::Std(tab(&[&["1", "-1"], &["0"]])))
                .unwrap(),
        );
        assert!(matches!(bad_gen, Err(Error::InvalidGenerator { .. })));

        // non-standard Std tag
        let bad_tag = engine.basis_vector(BasisTag::Std(tab(&[&["1", "-1"], &["5"]])));
        assert!(bad_tag.is_err());

        // wrong family
        let bad_family = engine.basis_vector(BasisTag::Gen(ShiftVector::zero(2).unwrap()));
        assert!(matches!(bad_family, Err(Error::IncompatibleTag(_))));
    }

    fn arb_coeff() -> impl Strategy<Value = Rat> {
        (-9i64..=9, 1i64..=5).prop_map(|(n, d)| Rat::new(n, d).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn action_is_linear(alpha in arb_coeff(), beta in arb_coeff()) {
            let v = tab(&[&["3", "1", "0"], &["1/2", "-2/3"], &["1/5"]]);
            let engine = Engine::with_defaults(ModuleSpec::generic(v).unwrap()).unwrap();
            let u = engine.basis_vector(BasisTag::Gen(ShiftVector::zero(3).unwrap())).unwrap();
            let w = engine.basis_vector(BasisTag::Gen(shift(3, &[(2, 1, 1), (1, 1, -1)]))).unwrap();
            let combo = u.scale(&alpha).add(&w.scale(&beta)).unwrap();
            for gen in [Generator::e(1, 2), Generator::e(2, 1), Generator::e(1, 3), Generator::e(2, 2)] {
                let lhs = engine.act(gen, &combo).unwrap();
                let rhs = engine.act(gen, &u).unwrap().scale(&alpha)
                    .add(&engine.act(gen, &w).unwrap().scale(&beta)).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
