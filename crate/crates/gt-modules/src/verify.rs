//! Exact identity checking over sampled module instances.
//!
//! Every check is an equality of rational numbers or of module vectors;
//! there are no tolerances. Random instances are drawn from a seeded
//! generator, so a run is reproducible from its configuration.

use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::engine::{fd_basis, fd_top_row, weyl_dim, BasisTag, Engine, Generator, ModuleSpec, ModuleVector};
use crate::error::{Error, Result};
use crate::formulas::{
    d_of, eval_expr, eval_gamma, eval_p, eval_q, rat_gamma, EvalContext, EvalOptions, Expr,
    Mutation, Sign,
};
use crate::jet::Jet;
use crate::rat::Rat;
use crate::tableau::{Position, ShiftVector, SingularPair, Tableau};

/// Outcome of one check over one instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub instance: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureDetail>,
}

/// The first offending identity of a failed check, with both exact sides.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FailureDetail {
    pub identity: String,
    pub lhs: String,
    pub rhs: String,
}

impl CheckReport {
    fn pass(check: &str, instance: String) -> Self {
        CheckReport { check: check.into(), instance, pass: true, failure: None }
    }

    fn fail(check: &str, instance: String, identity: String, lhs: String, rhs: String) -> Self {
        CheckReport {
            check: check.into(),
            instance,
            pass: false,
            failure: Some(FailureDetail { identity, lhs, rhs }),
        }
    }
}

/// Which suites to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Bracket,
    Casimir,
    Singular,
    Regularity,
    Dlemma,
    Dimension,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Bracket,
        Suite::Casimir,
        Suite::Singular,
        Suite::Regularity,
        Suite::Dlemma,
        Suite::Dimension,
    ];
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bracket" => Ok(Suite::Bracket),
            "casimir" => Ok(Suite::Casimir),
            "singular" => Ok(Suite::Singular),
            "regularity" => Ok(Suite::Regularity),
            "dlemma" => Ok(Suite::Dlemma),
            "dimension" => Ok(Suite::Dimension),
            other => Err(Error::InvalidConfig(format!("unknown suite `{other}`"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Bracket => "bracket",
            Suite::Casimir => "casimir",
            Suite::Singular => "singular",
            Suite::Regularity => "regularity",
            Suite::Dlemma => "dlemma",
            Suite::Dimension => "dimension",
        };
        f.write_str(name)
    }
}

/// Run configuration; identical configurations produce identical reports.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub n_max: usize,
    pub seed: u64,
    pub radius: i64,
    pub trunc: i64,
    pub floor: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutation: Option<String>,
    pub suites: Vec<Suite>,
    pub generic_count: usize,
    pub singular_count: usize,
    pub tags_per_instance: usize,
    pub dlemma_count: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_max: 3,
            seed: 0,
            radius: 2,
            trunc: 2,
            floor: -4,
            mutation: None,
            suites: Suite::ALL.to_vec(),
            generic_count: 20,
            singular_count: 10,
            tags_per_instance: 3,
            dlemma_count: 20,
        }
    }
}

impl VerifyConfig {
    pub fn options(&self) -> Result<EvalOptions> {
        let mutation = match &self.mutation {
            None => Mutation::None,
            Some(flag) => Mutation::from_flag(flag)?,
        };
        Ok(EvalOptions { trunc: self.trunc, floor: self.floor, mutation })
    }

    fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::InvalidConfig(format!(
                "n must be at least 2, got n_max = {}",
                self.n_max
            )));
        }
        if self.radius < 0 {
            return Err(Error::InvalidConfig("shift ball radius must be >= 0".into()));
        }
        self.options()?;
        Ok(())
    }
}

/// One sampled instance of each family, shared across suites.
#[derive(Clone, Debug)]
pub struct Instances {
    pub fd: Vec<FdInstance>,
    pub generic: Vec<GenericInstance>,
    pub singular: Vec<SingularInstance>,
}

#[derive(Clone, Debug)]
pub struct FdInstance {
    pub lambda: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct GenericInstance {
    pub index: usize,
    pub tableau: Tableau,
    pub shifts: Vec<ShiftVector>,
}

#[derive(Clone, Debug)]
pub struct SingularInstance {
    pub index: usize,
    pub tableau: Tableau,
    pub pair: SingularPair,
    pub sym_shifts: Vec<ShiftVector>,
    pub alt_shifts: Vec<ShiftVector>,
}

impl FdInstance {
    fn describe(&self) -> String {
        format!("fd n={} lambda={:?}", self.lambda.len(), self.lambda)
    }
}

impl GenericInstance {
    fn describe(&self) -> String {
        format!("generic n={} #{:02} v={:?}", self.tableau.n(), self.index, self.tableau)
    }
}

impl SingularInstance {
    fn describe(&self) -> String {
        format!(
            "one-singular n={} #{:02} v={:?} pair=({},{},{})",
            self.tableau.n(),
            self.index,
            self.tableau,
            self.pair.row,
            self.pair.i,
            self.pair.j
        )
    }
}

/// Small dominant weights exercised per rank.
pub fn small_weights(n: usize) -> Vec<Vec<i64>> {
    let pad = |prefix: &[i64]| -> Vec<i64> {
        let mut v = prefix.to_vec();
        v.resize(n, 0);
        v
    };
    match n {
        2 => vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![2, 1], vec![3, 1]],
        3 => vec![
            pad(&[0]),
            pad(&[1]),
            pad(&[1, 1]),
            pad(&[2, 1]),
            pad(&[2]),
        ],
        _ => vec![
            pad(&[0]),
            pad(&[1]),
            pad(&[1, 1]),
            pad(&[2, 1]),
            pad(&[1, 1, 1]),
        ],
    }
}

fn sample_rat(rng: &mut StdRng) -> Rat {
    Rat::new(rng.gen_range(-20..=20), rng.gen_range(1..=7)).expect("nonzero denominator")
}

fn sample_row(rng: &mut StdRng, len: usize) -> Vec<Rat> {
    (0..len).map(|_| sample_rat(rng)).collect()
}

fn distinct(row: &[Rat]) -> bool {
    for (idx, a) in row.iter().enumerate() {
        if row[idx + 1..].iter().any(|b| a == b) {
            return false;
        }
    }
    true
}

fn sample_generic_tableau(rng: &mut StdRng, n: usize) -> Tableau {
    loop {
        let mut rows: Vec<Vec<Rat>> = (1..=n).map(|k| sample_row(rng, k)).collect();
        // distinct top row keeps every row invariant evaluable
        while !distinct(&rows[n - 1]) {
            rows[n - 1] = sample_row(rng, n);
        }
        let t = Tableau::from_rows(rows).expect("well-formed rows");
        if t.classify().generic {
            return t;
        }
    }
}

fn sample_singular_tableau(rng: &mut StdRng, n: usize, pair: SingularPair) -> Tableau {
    loop {
        let mut rows: Vec<Vec<Rat>> = (1..=n).map(|k| sample_row(rng, k)).collect();
        while !distinct(&rows[n - 1]) {
            rows[n - 1] = sample_row(rng, n);
        }
        rows[pair.row - 1][pair.j - 1] = rows[pair.row - 1][pair.i - 1].clone();
        let t = Tableau::from_rows(rows).expect("well-formed rows");
        let c = t.classify();
        if c.is_1_critical && c.singular_pairs == vec![pair] {
            return t;
        }
    }
}

/// All shifts with zero top row and 1-norm at most `radius`, in a fixed
/// order.
pub fn shift_ball(n: usize, radius: i64) -> Vec<ShiftVector> {
    let mut coords = Vec::new();
    for row in 1..n {
        for col in 1..=row {
            coords.push((row, col));
        }
    }
    let mut out = Vec::new();
    let mut current = ShiftVector::zero(n).expect("n >= 2");
    fn rec(
        coords: &[(usize, usize)],
        idx: usize,
        budget: i64,
        current: &mut ShiftVector,
        out: &mut Vec<ShiftVector>,
    ) {
        if idx == coords.len() {
            out.push(current.clone());
            return;
        }
        let (row, col) = coords[idx];
        for val in -budget..=budget {
            current.set_entry(row, col, val);
            rec(coords, idx + 1, budget - val.abs(), current, out);
        }
        current.set_entry(row, col, 0);
    }
    rec(&coords, 0, radius, &mut current, &mut out);
    out.sort();
    out
}

fn sample_distinct<T: Clone>(rng: &mut StdRng, pool: &[T], count: usize) -> Vec<T> {
    if pool.len() <= count {
        return pool.to_vec();
    }
    let mut picked = Vec::new();
    let mut indices: Vec<usize> = Vec::new();
    while indices.len() < count {
        let idx = rng.gen_range(0..pool.len());
        if !indices.contains(&idx) {
            indices.push(idx);
        }
    }
    indices.sort_unstable();
    for idx in indices {
        picked.push(pool[idx].clone());
    }
    picked
}

/// Singular pair choices exercised per rank.
pub fn singular_pairs_for(n: usize) -> Vec<SingularPair> {
    let mut pairs = Vec::new();
    if n >= 3 {
        pairs.push(SingularPair { row: 2, i: 1, j: 2 });
    }
    if n >= 4 {
        pairs.push(SingularPair { row: 3, i: 1, j: 3 });
    }
    pairs
}

/// Draws the instance sets for every rank `2..=n_max` from the seed.
pub fn sample_instances(config: &VerifyConfig) -> Result<Instances> {
    config.validate()?;
    let mut fd = Vec::new();
    let mut generic = Vec::new();
    let mut singular = Vec::new();
    for n in 2..=config.n_max {
        let mut rng = StdRng::seed_from_u64(config.seed ^ (n as u64).wrapping_mul(0x9e37_79b9));
        for lambda in small_weights(n) {
            fd.push(FdInstance { lambda });
        }
        let ball = shift_ball(n, config.radius);
        for index in 0..config.generic_count {
            let tableau = sample_generic_tableau(&mut rng, n);
            let shifts = sample_distinct(&mut rng, &ball, config.tags_per_instance);
            generic.push(GenericInstance { index, tableau, shifts });
        }
        let pairs = singular_pairs_for(n);
        if !pairs.is_empty() {
            for index in 0..config.singular_count {
                let pair = pairs[index % pairs.len()];
                let tableau = sample_singular_tableau(&mut rng, n, pair);
                let sym_shifts = sample_distinct(&mut rng, &ball, config.tags_per_instance);
                let not_fixed: Vec<ShiftVector> = ball
                    .iter()
                    .filter(|z| !z.is_tau_fixed(&pair))
                    .cloned()
                    .collect();
                let alt_shifts = sample_distinct(&mut rng, &not_fixed, config.tags_per_instance);
                singular.push(SingularInstance { index, tableau, pair, sym_shifts, alt_shifts });
            }
        }
    }
    Ok(Instances { fd, generic, singular })
}

/// Runs the configured suites and returns one report per (check, instance),
/// sorted by check name then instance descriptor.
pub fn run(config: &VerifyConfig) -> Result<Vec<CheckReport>> {
    config.validate()?;
    let opts = config.options()?;
    let instances = sample_instances(config)?;
    let mut reports = Vec::new();
    for suite in &config.suites {
        match suite {
            Suite::Bracket => bracket_suite(&instances, &opts, &mut reports)?,
            Suite::Casimir => casimir_suite(&instances, &opts, &mut reports)?,
            Suite::Singular => singular_suite(&instances, &opts, &mut reports)?,
            Suite::Regularity => regularity_suite(&instances, &opts, &mut reports)?,
            Suite::Dlemma => dlemma_suite(&instances, config, &opts, &mut reports)?,
            Suite::Dimension => dimension_suite(config.n_max, &mut reports)?,
        }
    }
    reports.sort_by(|a, b| (&a.check, &a.instance).cmp(&(&b.check, &b.instance)));
    Ok(reports)
}

fn engine_tags(engine: &Engine, inst_tags: Vec<BasisTag>) -> Result<Vec<(BasisTag, ModuleVector)>> {
    let mut out = Vec::new();
    for tag in inst_tags {
        let vec = engine.basis_vector(tag.clone())?;
        if !vec.is_zero() {
            out.push((tag, vec));
        }
    }
    Ok(out)
}

fn fd_engine_and_tags(
    inst: &FdInstance,
    opts: &EvalOptions,
) -> Result<(Engine, Vec<(BasisTag, ModuleVector)>)> {
    let engine = Engine::new(ModuleSpec::finite_dim(inst.lambda.clone())?, *opts)?;
    let tags = fd_basis(&inst.lambda)?
        .into_iter()
        .map(BasisTag::Std)
        .collect();
    let tags = engine_tags(&engine, tags)?;
    Ok((engine, tags))
}

fn generic_engine_and_tags(
    inst: &GenericInstance,
    opts: &EvalOptions,
) -> Result<(Engine, Vec<(BasisTag, ModuleVector)>)> {
    let engine = Engine::new(ModuleSpec::generic(inst.tableau.clone())?, *opts)?;
    let tags = inst.shifts.iter().cloned().map(BasisTag::Gen).collect();
    let tags = engine_tags(&engine, tags)?;
    Ok((engine, tags))
}

fn singular_engine_and_tags(
    inst: &SingularInstance,
    opts: &EvalOptions,
) -> Result<(Engine, Vec<(BasisTag, ModuleVector)>)> {
    let engine = Engine::new(
        ModuleSpec::one_singular(inst.tableau.clone(), inst.pair)?,
        *opts,
    )?;
    let mut tags: Vec<BasisTag> = inst.sym_shifts.iter().cloned().map(BasisTag::Sym).collect();
    tags.extend(inst.alt_shifts.iter().cloned().map(BasisTag::Alt));
    let tags = engine_tags(&engine, tags)?;
    Ok((engine, tags))
}

/// `[E(a,b), E(c,d)] = delta_{bc} E(a,d) - delta_{da} E(c,b)`, exactly, for
/// every index combination and every tag.
fn bracket_all_pairs(
    engine: &Engine,
    tags: &[(BasisTag, ModuleVector)],
) -> Result<std::result::Result<(), FailureDetail>> {
    let n = engine.n();
    for (tag, vec) in tags {
        for a in 1..=n {
            for b in 1..=n {
                let eab = Generator::e(a, b);
                let ab_vec = engine.act(eab, vec)?;
                for c in 1..=n {
                    for d in 1..=n {
                        let ecd = Generator::e(c, d);
                        let lhs = engine
                            .act(eab, &engine.act(ecd, vec)?)?
                            .sub(&engine.act(ecd, &ab_vec)?)?;
                        let mut rhs = ModuleVector::zero(engine.spec().clone());
                        if b == c {
                            rhs = rhs.add(&engine.act(Generator::e(a, d), vec)?)?;
                        }
                        if d == a {
                            rhs = rhs.sub(&engine.act(Generator::e(c, b), vec)?)?;
                        }
                        if lhs != rhs {
                            return Ok(Err(FailureDetail {
                                identity: format!(
                                    "[E({a},{b}),E({c},{d})] on {tag:?}"
                                ),
                                lhs: format!("{:?}", lhs),
                                rhs: format!("{:?}", rhs),
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(Ok(()))
}

fn push_outcome(
    reports: &mut Vec<CheckReport>,
    check: &str,
    instance: String,
    outcome: std::result::Result<(), FailureDetail>,
) {
    match outcome {
        Ok(()) => reports.push(CheckReport::pass(check, instance)),
        Err(detail) => reports.push(CheckReport::fail(
            check,
            instance,
            detail.identity,
            detail.lhs,
            detail.rhs,
        )),
    }
}

fn bracket_suite(
    instances: &Instances,
    opts: &EvalOptions,
    reports: &mut Vec<CheckReport>,
) -> Result<()> {
    for inst in &instances.fd {
        let (engine, tags) = fd_engine_and_tags(inst, opts)?;
        let outcome = bracket_all_pairs(&engine, &tags)?;
        push_outcome(reports, "bracket", inst.describe(), outcome);
    }
    for inst in &instances.generic {
        let (engine, tags) = generic_engine_and_tags(inst, opts)?;
        let outcome = bracket_all_pairs(&engine, &tags)?;
        push_outcome(reports, "bracket", inst.describe(), outcome);
    }
    for inst in &instances.singular {
        let (engine, tags) = singular_engine_and_tags(inst, opts)?;
        let outcome = bracket_all_pairs(&engine, &tags)?;
        push_outcome(reports, "bracket", inst.describe(), outcome);
    }
    Ok(())
}

/// Diagonal action of the Gelfand-Tsetlin generators on the ordinary
/// families: `c_{m,t}` scales every tag by the row invariant at its point.
fn casimir_diagonal(
    engine: &Engine,
    tags: &[(BasisTag, ModuleVector)],
    point_of: impl Fn(&BasisTag) -> Result<Tableau>,
) -> Result<std::result::Result<(), FailureDetail>> {
    let n = engine.n();
    for (tag, vec) in tags {
        let point = point_of(tag)?;
        for m in 1..=n {
            for t in 1..=m {
                let acted = engine.act_casimir(m, t, vec)?;
                let expected = vec.scale(&rat_gamma(&point, m, t, engine.options())?);
                if acted != expected {
                    return Ok(Err(FailureDetail {
                        identity: format!("c({m},{t}) on {tag:?}"),
                        lhs: format!("{:?}", acted),
                        rhs: format!("{:?}", expected),
                    }));
                }
            }
        }
    }
    Ok(Ok(()))
}

fn casimir_suite(
    instances: &Instances,
    opts: &EvalOptions,
    reports: &mut Vec<CheckReport>,
) -> Result<()> {
    for inst in &instances.fd {
        let (engine, tags) = fd_engine_and_tags(inst, opts)?;
        let outcome = casimir_diagonal(&engine, &tags, |tag| match tag {
            BasisTag::Std(t) => Ok(t.clone()),
            _ => Err(Error::IncompatibleTag("expected a standard tag".into())),
        })?;
        push_outcome(reports, "casimir", inst.describe(), outcome);
    }
    for inst in &instances.generic {
        let (engine, tags) = generic_engine_and_tags(inst, opts)?;
        let base = inst.tableau.clone();
        let outcome = casimir_diagonal(&engine, &tags, |tag| match tag {
            BasisTag::Gen(z) => base.apply_shift(z),
            _ => Err(Error::IncompatibleTag("expected a shift tag".into())),
        })?;
        push_outcome(reports, "casimir", inst.describe(), outcome);
    }
    Ok(())
}

/// The 2x2 block structure of `c_{m,t}` on the singular family: diagonal
/// away from the pair row; on the pair row, diagonal value plus a
/// derivative term from the antisymmetric tag into the symmetric one, and
/// `(c - gamma)^2 = 0` on the span.
fn singular_block(
    engine: &Engine,
    inst: &SingularInstance,
) -> Result<std::result::Result<(), FailureDetail>> {
    let n = engine.n();
    let k = inst.pair.row;
    let fail = |identity: String, lhs: String, rhs: String| {
        Ok(Err(FailureDetail { identity, lhs, rhs }))
    };

    let mut shifts = inst.sym_shifts.clone();
    for z in &inst.alt_shifts {
        if !shifts.contains(z) {
            shifts.push(z.clone());
        }
    }

    for z in &shifts {
        let ctx = EvalContext::new(
            inst.tableau.clone(),
            z.clone(),
            Some(inst.pair),
            *engine.options(),
        )?;
        let sym = engine.basis_vector(BasisTag::Sym(z.clone()))?;
        let alt = engine.basis_vector(BasisTag::Alt(z.clone()))?;
        for m in 1..=n {
            for t in 1..=m {
                let gamma_jet = eval_gamma(&ctx, m, t)?;
                if !gamma_jet.is_regular() {
                    return fail(
                        format!("gamma({m},{t}) regular at shift {z:?}"),
                        gamma_jet.to_string(),
                        "a regular jet".into(),
                    );
                }
                let gamma0 = gamma_jet.coeff(0)?;
                let dgamma = gamma_jet.coeff(1)?;

                let on_sym = engine.act_casimir(m, t, &sym)?;
                let expected_sym = sym.scale(&gamma0);
                if on_sym != expected_sym {
                    return fail(
                        format!("c({m},{t}) on Sym{z:?}"),
                        format!("{:?}", on_sym),
                        format!("{:?}", expected_sym),
                    );
                }

                if alt.is_zero() {
                    continue;
                }
                let on_alt = engine.act_casimir(m, t, &alt)?;
                let expected_alt = if m == k {
                    alt.scale(&gamma0).add(&sym.scale(&dgamma))?
                } else {
                    // away from the pair row the derivative term vanishes
                    alt.scale(&gamma0)
                };
                if on_alt != expected_alt {
                    return fail(
                        format!("c({m},{t}) on Alt{z:?}"),
                        format!("{:?}", on_alt),
                        format!("{:?}", expected_alt),
                    );
                }
                if m == k {
                    // (c - gamma)^2 annihilates the span
                    let once = on_alt.sub(&alt.scale(&gamma0))?;
                    let twice = engine.act_casimir(m, t, &once)?.sub(&once.scale(&gamma0))?;
                    if !twice.is_zero() {
                        return fail(
                            format!("(c({m},{t}) - gamma)^2 on Alt{z:?}"),
                            format!("{:?}", twice),
                            "0".into(),
                        );
                    }
                }
            }
        }
    }

    // spot value: with a (1,0) shift on the pair entries of row 2, the
    // derivative coefficient of c(2,2) from Alt into Sym is exactly 1
    if k == 2 {
        let z = ShiftVector::delta(n, 2, inst.pair.i)?;
        let ctx =
            EvalContext::new(inst.tableau.clone(), z.clone(), Some(inst.pair), *engine.options())?;
        let oracle = d_of(&ctx, &Expr::Gamma(2, 2))?;
        if !oracle.is_one() {
            return fail(
                format!("derivative oracle d(gamma(2,2)) at shift {z:?}"),
                oracle.to_string(),
                "1".into(),
            );
        }
        let alt = engine.basis_vector(BasisTag::Alt(z.clone()))?;
        let acted = engine.act_casimir(2, 2, &alt)?;
        let sym_tag = match engine.spec().canonicalize_tag(BasisTag::Sym(z))? {
            Some((tag, _)) => tag,
            None => unreachable!("symmetric tags are never zero"),
        };
        let coeff = acted.coeff(&sym_tag);
        if !coeff.is_one() {
            return fail(
                "off-diagonal coefficient of c(2,2) at the (1,0) shift".into(),
                coeff.to_string(),
                "1".into(),
            );
        }
    }
    Ok(Ok(()))
}

fn singular_suite(
    instances: &Instances,
    opts: &EvalOptions,
    reports: &mut Vec<CheckReport>,
) -> Result<()> {
    for inst in &instances.singular {
        let (engine, _) = singular_engine_and_tags(inst, opts)?;
        let outcome = singular_block(&engine, inst)?;
        push_outcome(reports, "singular", inst.describe(), outcome);
    }
    Ok(())
}

/// Every coefficient jet behind the singular action must be regular; the
/// raw unreduced coefficient `1/q` at the pair must not be.
fn regularity_suite(
    instances: &Instances,
    opts: &EvalOptions,
    reports: &mut Vec<CheckReport>,
) -> Result<()> {
    for inst in &instances.singular {
        let (engine, tags) = singular_engine_and_tags(inst, opts)?;
        let n = engine.n();
        let mut outcome: std::result::Result<(), FailureDetail> = Ok(());
        'scan: for (tag, _) in &tags {
            for t in 1..=(n - 1) {
                for gen in [Generator::e(t, t + 1), Generator::e(t + 1, t)] {
                    let jets = engine.one_singular_coefficient_jets(gen, tag)?;
                    for jet in jets {
                        if !jet.is_regular() {
                            outcome = Err(FailureDetail {
                                identity: format!("coefficient of {gen} on {tag:?}"),
                                lhs: jet.to_string(),
                                rhs: "a regular jet".into(),
                            });
                            break 'scan;
                        }
                    }
                }
            }
        }
        push_outcome(reports, "regularity", inst.describe(), outcome);

        // negative control: the unreduced basis coefficient has a genuine
        // pole at a fixed shift, and the jet arithmetic must expose it
        let ctx = EvalContext::new(
            inst.tableau.clone(),
            ShiftVector::zero(inst.tableau.n())?,
            Some(inst.pair),
            *opts,
        )?;
        let raw = Jet::constant(Rat::one(), opts.trunc - opts.floor)
            .div(&eval_q(&ctx, inst.pair.row, inst.pair.i)?, opts.floor)?;
        let outcome = if raw.is_regular() {
            Err(FailureDetail {
                identity: "1/q at the critical pair must be irregular".into(),
                lhs: raw.to_string(),
                rhs: "an irregular jet".into(),
            })
        } else {
            Ok(())
        };
        push_outcome(reports, "regularity-negative", inst.describe(), outcome);
    }
    Ok(())
}

fn sample_position(rng: &mut StdRng, n: usize) -> (usize, usize) {
    let row = rng.gen_range(1..=n);
    let col = rng.gen_range(1..=row);
    (row, col)
}

fn sample_expr(rng: &mut StdRng, n: usize, pair: &SingularPair, depth: usize) -> Expr {
    if depth == 0 {
        return match rng.gen_range(0..5) {
            0 => Expr::Const(sample_rat(rng)),
            1 => Expr::coord(pair.row, pair.i),
            2 => Expr::coord(pair.row, pair.j),
            3 => {
                let (row, col) = sample_position(rng, n);
                Expr::coord(row, col)
            }
            _ => {
                let (row, col) = sample_position(rng, n);
                Expr::P(Sign::Minus, row, col)
            }
        };
    }
    let a = Box::new(sample_expr(rng, n, pair, depth - 1));
    let b = Box::new(sample_expr(rng, n, pair, depth - 1));
    match rng.gen_range(0..5) {
        0 => Expr::Add(a, b),
        1 => Expr::Sub(a, b),
        2 => Expr::Mul(a, b),
        3 => Expr::Div(a, b),
        _ => Expr::Neg(a),
    }
}

/// Compares two jets coefficient-by-coefficient through their shared
/// window, reaching down to the pole floor.
fn jets_agree(a: &Jet, b: &Jet, floor: i64) -> bool {
    let hi = a.trunc_order().min(b.trunc_order());
    (floor..=hi).all(|k| a.coeff(k) == b.coeff(k))
}

/// The derivative lemma: `(f - tau.f)/(x - y) = 2 D(f)` for functions
/// regular at the critical point, plus the transport and equivariance
/// identities for the named products.
fn dlemma_suite(
    instances: &Instances,
    config: &VerifyConfig,
    opts: &EvalOptions,
    reports: &mut Vec<CheckReport>,
) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for inst in &instances.singular {
        // one instance per (rank, pair row) is enough: the identities are
        // functional, not instance-specific
        if !seen.insert((inst.tableau.n(), inst.pair.row)) {
            continue;
        }
        let n = inst.tableau.n();
        let pair = inst.pair;
        let mut rng = StdRng::seed_from_u64(config.seed ^ 0xd1ea_55ed ^ (n as u64) << 8);
        let ctx = EvalContext::new(
            inst.tableau.clone(),
            ShiftVector::zero(n)?,
            Some(pair),
            *opts,
        )?;
        let x = Expr::coord(pair.row, pair.i);
        let y = Expr::coord(pair.row, pair.j);
        let xy = Expr::Sub(Box::new(x.clone()), Box::new(y.clone()));

        let mut exprs: Vec<Expr> = vec![
            // fixed anchors: a symmetric function, the coordinate itself,
            // and the reduced quotient from the pair row
            Expr::Add(Box::new(x.clone()), Box::new(y.clone())),
            x.clone(),
            Expr::Div(
                Box::new(Expr::P(Sign::Plus, pair.row, pair.i)),
                Box::new(Expr::QStar(pair.row, pair.i)),
            ),
        ];
        let mut attempts = 0;
        while exprs.len() < config.dlemma_count && attempts < 1000 {
            attempts += 1;
            let f = sample_expr(&mut rng, n, &pair, 2);
            match eval_expr(&ctx, &f) {
                Ok(jet) if jet.is_regular() && jet.trunc_order() >= 2 => exprs.push(f),
                _ => continue,
            }
        }

        let mut outcome: std::result::Result<(), FailureDetail> = Ok(());
        for f in &exprs {
            // tau.f is computed by swapping indices inside the expression,
            // an independent route from the parameter flip of f's jet
            let lhs_expr = Expr::Div(
                Box::new(Expr::Sub(Box::new(f.clone()), Box::new(f.tau(&pair)))),
                Box::new(xy.clone()),
            );
            let lhs = match eval_expr(&ctx, &lhs_expr) {
                Ok(jet) => jet,
                Err(e) => {
                    outcome = Err(FailureDetail {
                        identity: format!("(f - tau.f)/(x-y) for f = {f:?}"),
                        lhs: format!("error: {e}"),
                        rhs: "a regular jet".into(),
                    });
                    break;
                }
            };
            // the two sides agree in the reduced algebra: at the critical
            // point the quotient equals 2 D(f), and its derivative term
            // vanishes by symmetry
            let twice_d = Rat::from_int(2) * d_of(&ctx, f)?;
            let ok = lhs.is_regular()
                && lhs.coeff(0)? == twice_d
                && lhs.coeff(1)? == Rat::zero();
            if !ok {
                outcome = Err(FailureDetail {
                    identity: format!("(f - tau.f)/(x-y) = 2 D(f) for f = {f:?}"),
                    lhs: lhs.to_string(),
                    rhs: format!("{twice_d} + 0*e + O(e^2)"),
                });
                break;
            }
        }

        // transport: evaluating tau.f at the transported shift matches the
        // parameter flip of f's jet
        if outcome.is_ok() {
            let ball = shift_ball(n, config.radius);
            'transport: for _ in 0..4 {
                let z = sample_distinct(&mut rng, &ball, 1).remove(0);
                let ctx_z = ctx.with_shift(z.clone())?;
                let ctx_tz = ctx.with_shift(z.tau_apply(&pair))?;
                for f in exprs.iter().take(6) {
                    let lhs = match eval_expr(&ctx_z, f) {
                        Ok(jet) => jet.flip_eps(),
                        Err(_) => continue,
                    };
                    let rhs = match eval_expr(&ctx_tz, &f.tau(&pair)) {
                        Ok(jet) => jet,
                        Err(_) => continue,
                    };
                    if !jets_agree(&lhs, &rhs, opts.floor) {
                        outcome = Err(FailureDetail {
                            identity: format!("tau transport of {f:?} at shift {z:?}"),
                            lhs: lhs.to_string(),
                            rhs: rhs.to_string(),
                        });
                        break 'transport;
                    }
                }
            }
        }

        // equivariance: tau . p = p at the swapped position, ditto q
        if outcome.is_ok() {
            let ball = shift_ball(n, config.radius);
            let z = sample_distinct(&mut rng, &ball, 1).remove(0);
            let ctx_z = ctx.with_shift(z.clone())?;
            let ctx_tz = ctx.with_shift(z.tau_apply(&pair))?;
            'equi: for row in 1..=n {
                for col in 1..=row {
                    let swapped = pair.tau_pos(Position::new(row, col, n)?);
                    for sign in [Sign::Plus, Sign::Minus] {
                        if sign == Sign::Plus && row == n {
                            continue;
                        }
                        let lhs = eval_p(&ctx_z, sign, row, col)?.flip_eps();
                        let rhs = eval_p(&ctx_tz, sign, swapped.row, swapped.col)?;
                        if !jets_agree(&lhs, &rhs, opts.floor) {
                            outcome = Err(FailureDetail {
                                identity: format!("tau equivariance of p{sign:?}({row},{col})"),
                                lhs: lhs.to_string(),
                                rhs: rhs.to_string(),
                            });
                            break 'equi;
                        }
                    }
                    let lhs = eval_q(&ctx_z, row, col)?.flip_eps();
                    let rhs = eval_q(&ctx_tz, swapped.row, swapped.col)?;
                    if !jets_agree(&lhs, &rhs, opts.floor) {
                        outcome = Err(FailureDetail {
                            identity: format!("tau equivariance of q({row},{col})"),
                            lhs: lhs.to_string(),
                            rhs: rhs.to_string(),
                        });
                        break 'equi;
                    }
                }
            }
        }

        push_outcome(reports, "dlemma", inst.describe(), outcome);
    }
    Ok(())
}

/// Enumerated standard bases must match the product-formula dimension.
fn dimension_suite(n_max: usize, reports: &mut Vec<CheckReport>) -> Result<()> {
    for n in 2..=n_max {
        let mut outcome: std::result::Result<(), FailureDetail> = Ok(());
        for lambda in dominant_weights(n, 3) {
            let enumerated = fd_basis(&lambda)?.len() as u64;
            let by_formula = weyl_dim(&lambda)?;
            if enumerated != by_formula {
                outcome = Err(FailureDetail {
                    identity: format!("dimension of lambda={lambda:?}"),
                    lhs: enumerated.to_string(),
                    rhs: by_formula.to_string(),
                });
                break;
            }
        }
        push_outcome(reports, "dimension", format!("fd n={n} entries 0..=3"), outcome);
    }
    Ok(())
}

/// All dominant weights with entries in `0..=max_entry`.
pub fn dominant_weights(n: usize, max_entry: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    fn rec(n: usize, hi: i64, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for v in (0..=hi).rev() {
            current.push(v);
            rec(n, v, current, out);
            current.pop();
        }
    }
    rec(n, max_entry, &mut current, &mut out);
    out.sort();
    out
}

/// Sanity marker used by tests: the top row of a standard basis member.
pub fn expected_top_row(lambda: &[i64]) -> Vec<i64> {
    fd_top_row(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> VerifyConfig {
        VerifyConfig {
            n_max: 3,
            generic_count: 3,
            singular_count: 2,
            tags_per_instance: 2,
            dlemma_count: 8,
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn default_suites_pass_at_small_rank() {
        let reports = run(&quick_config()).unwrap();
        assert!(!reports.is_empty());
        for r in &reports {
            assert!(r.pass, "{}: {} failed: {:?}", r.check, r.instance, r.failure);
        }
    }

    #[test]
    fn identical_configs_give_identical_reports() {
        let a = run(&quick_config()).unwrap();
        let b = run(&quick_config()).unwrap();
        let fmt = |rs: &[CheckReport]| {
            rs.iter()
                .map(|r| format!("{}|{}|{}", r.check, r.instance, r.pass))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(fmt(&a), fmt(&b));
    }

    #[test]
    fn invalid_rank_is_a_config_error() {
        let config = VerifyConfig { n_max: 1, ..VerifyConfig::default() };
        assert!(matches!(run(&config), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn every_mutation_is_caught() {
        for mutation in Mutation::ALL {
            let config = VerifyConfig {
                mutation: Some(mutation.flag().unwrap().to_string()),
                ..quick_config()
            };
            let reports = run(&config).unwrap();
            let failed: Vec<&CheckReport> = reports.iter().filter(|r| !r.pass).collect();
            assert!(
                !failed.is_empty(),
                "mutation {mutation:?} slipped through all checks"
            );
        }
    }

    #[test]
    fn shift_ball_counts() {
        // n=2: one free coordinate, radius 2: {-2,...,2}
        assert_eq!(shift_ball(2, 2).len(), 5);
        // n=3: three free coordinates
        let ball = shift_ball(3, 1);
        assert_eq!(ball.len(), 7);
        assert!(ball.iter().all(|z| z.norm1() <= 1));
    }

    #[test]
    fn dominant_weight_enumeration() {
        let ws = dominant_weights(2, 3);
        assert_eq!(ws.len(), 10);
        assert!(ws.contains(&vec![3, 1]));
        assert!(!ws.contains(&vec![1, 3]));
    }

    #[test]
    fn bracket_detects_a_broken_sign() {
        let opts = EvalOptions { mutation: Mutation::RaiseSignFlipped, ..Default::default() };
        let inst = FdInstance { lambda: vec![1, 0] };
        let (engine, tags) = fd_engine_and_tags(&inst, &opts).unwrap();
        let outcome = bracket_all_pairs(&engine, &tags).unwrap();
        assert!(outcome.is_err());
    }
}
