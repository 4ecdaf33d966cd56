//! The named rational functions of the tableau action formulas and their
//! exact evaluation.
//!
//! Everything here evaluates at a shifted point `w = v + z`, either as a
//! plain rational (when no denominator vanishes) or as a [`Jet`] along the
//! critical path attached to a singular pair `(k,i),(k,j)`: position
//! `(k,i)` moves to `w_{k,i} + e/2` and `(k,j)` to `w_{k,j} - e/2`, so the
//! `e^0` coefficient of a jet is the value at `w` and the `e^1` coefficient
//! is the directional derivative `D = (d/dx - d/dy)/2` at `w`.

use crate::error::{Error, Result};
use crate::jet::{Jet, DEFAULT_FLOOR, DEFAULT_TRUNC};
use crate::rat::Rat;
use crate::tableau::{Position, ShiftVector, SingularPair, Tableau};

/// Which of the two interlacing products `p` refers to: `Plus` runs over
/// the row above, `Minus` over the row below.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Deliberate single-site formula corruptions used by the verification
/// harness to prove the checks can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mutation {
    #[default]
    None,
    /// Flip the sign of the raising generator's coefficients.
    RaiseSignFlipped,
    /// Drop the `+ m - 1` shift inside the row invariants.
    GammaShiftDropped,
    /// Drop the last factor of the `Minus` interlacing product.
    PMinusFactorDropped,
    /// Swap the orientation of the critical path.
    PathOrientationSwapped,
}

impl Mutation {
    pub const ALL: [Mutation; 4] = [
        Mutation::RaiseSignFlipped,
        Mutation::GammaShiftDropped,
        Mutation::PMinusFactorDropped,
        Mutation::PathOrientationSwapped,
    ];

    pub fn flag(&self) -> Option<&'static str> {
        match self {
            Mutation::None => None,
            Mutation::RaiseSignFlipped => Some("sign-e12"),
            Mutation::GammaShiftDropped => Some("gamma-shift"),
            Mutation::PMinusFactorDropped => Some("pminus-factor"),
            Mutation::PathOrientationSwapped => Some("tau-orientation"),
        }
    }

    pub fn from_flag(flag: &str) -> Result<Mutation> {
        Mutation::ALL
            .iter()
            .copied()
            .find(|m| m.flag() == Some(flag))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown mutation `{flag}`")))
    }
}

/// Evaluation options shared by all formula and action code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    /// Order through which reported jets are guaranteed exact.
    pub trunc: i64,
    /// Lowest admissible exponent before a pole is a structural error.
    pub floor: i64,
    pub mutation: Mutation,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { trunc: DEFAULT_TRUNC, floor: DEFAULT_FLOOR, mutation: Mutation::None }
    }
}

impl EvalOptions {
    fn validate(&self) -> Result<()> {
        if self.trunc < 1 {
            return Err(Error::InvalidConfig(format!(
                "truncation order must be >= 1, got {}",
                self.trunc
            )));
        }
        if self.floor > 0 {
            return Err(Error::InvalidConfig(format!(
                "pole floor must be <= 0, got {}",
                self.floor
            )));
        }
        Ok(())
    }

    /// Jets are built with guard orders above the reported truncation so
    /// that intermediate quotients by pole factors stay exact through
    /// `trunc`.
    fn working_order(&self) -> i64 {
        self.trunc - self.floor
    }

    /// `-1` for the raising generator, `+1` under the sign mutation.
    pub(crate) fn raise_sign(&self) -> Rat {
        match self.mutation {
            Mutation::RaiseSignFlipped => Rat::one(),
            _ => -Rat::one(),
        }
    }

    fn gamma_shift(&self, m: usize) -> Rat {
        match self.mutation {
            Mutation::GammaShiftDropped => Rat::zero(),
            _ => Rat::from_int(m as i64 - 1),
        }
    }

    /// Columns of the adjacent row entering the `p` product.
    fn p_factor_cols(&self, sign: Sign, row: usize) -> std::ops::RangeInclusive<usize> {
        match sign {
            Sign::Plus => 1..=(row + 1),
            Sign::Minus => {
                let mut last = row.saturating_sub(1);
                if self.mutation == Mutation::PMinusFactorDropped {
                    last = last.saturating_sub(1);
                }
                1..=last
            }
        }
    }
}

/// A shifted evaluation point `v + z`, optionally carrying the critical
/// path attached to a singular pair. When the pair is present, `v` must be
/// a 1-critical representative (`v_{k,i} = v_{k,j}`).
#[derive(Clone, Debug)]
pub struct EvalContext {
    v: Tableau,
    z: ShiftVector,
    pair: Option<SingularPair>,
    opts: EvalOptions,
    /// Materialized `v + z`.
    point: Tableau,
}

impl EvalContext {
    pub fn new(
        v: Tableau,
        z: ShiftVector,
        pair: Option<SingularPair>,
        opts: EvalOptions,
    ) -> Result<Self> {
        opts.validate()?;
        if z.n() != v.n() {
            return Err(Error::SizeMismatch { expected: v.n(), got: z.n() });
        }
        if let Some(p) = &pair {
            SingularPair::new(p.row, p.i, p.j, v.n())?;
            if v.entry(p.row, p.i) != v.entry(p.row, p.j) {
                return Err(Error::InvalidSpec(format!(
                    "path requires a 1-critical representative: entries ({},{}) and ({},{}) differ",
                    p.row, p.i, p.row, p.j
                )));
            }
        }
        let point = v.apply_shift(&z)?;
        Ok(EvalContext { v, z, pair, opts, point })
    }

    /// Point without a path, zero shift.
    pub fn at_point(v: Tableau, opts: EvalOptions) -> Result<Self> {
        let z = ShiftVector::zero(v.n())?;
        EvalContext::new(v, z, None, opts)
    }

    pub fn n(&self) -> usize {
        self.v.n()
    }

    pub fn base(&self) -> &Tableau {
        &self.v
    }

    pub fn shift(&self) -> &ShiftVector {
        &self.z
    }

    pub fn pair(&self) -> Option<&SingularPair> {
        self.pair.as_ref()
    }

    pub fn options(&self) -> &EvalOptions {
        &self.opts
    }

    /// The shifted point `v + z`.
    pub fn point(&self) -> &Tableau {
        &self.point
    }

    /// Same point, different shift.
    pub fn with_shift(&self, z: ShiftVector) -> Result<Self> {
        EvalContext::new(self.v.clone(), z, self.pair, self.opts)
    }

    /// The coordinate function at `pos`, as a jet along the path.
    pub fn coord_jet(&self, pos: Position) -> Jet {
        let order = self.opts.working_order();
        let base = self.point.get(pos).clone();
        let direction = match &self.pair {
            Some(p) if pos.row == p.row && pos.col == p.i => 1,
            Some(p) if pos.row == p.row && pos.col == p.j => -1,
            _ => 0,
        };
        if direction == 0 {
            return Jet::constant(base, order);
        }
        let orientation = match self.opts.mutation {
            Mutation::PathOrientationSwapped => -direction,
            _ => direction,
        };
        let half = Rat::new(orientation, 2).expect("nonzero denominator");
        &Jet::constant(base, order) + &Jet::monomial(half, 1, order)
    }

    fn coord(&self, row: usize, col: usize) -> Result<Jet> {
        let pos = Position::new(row, col, self.n())?;
        Ok(self.coord_jet(pos))
    }

    /// The unshifted coordinate difference `x - y` of the pair along the
    /// path; exactly the path parameter at a 1-critical representative.
    pub fn xy_jet(&self) -> Result<Jet> {
        let p = self.pair.as_ref().ok_or_else(|| {
            Error::InvalidSpec("pair difference requested without a singular pair".into())
        })?;
        let order = self.opts.working_order();
        let diff = self.v.entry(p.row, p.i) - self.v.entry(p.row, p.j);
        let sign = match self.opts.mutation {
            Mutation::PathOrientationSwapped => -Rat::one(),
            _ => Rat::one(),
        };
        Ok(&Jet::constant(diff, order) + &Jet::monomial(sign, 1, order))
    }
}

/// Interlacing product `p` at the shifted point: the product of the
/// differences between the entry at `(row, col)` and every entry of the
/// adjacent row (above for `Plus`, below for `Minus`; the empty product
/// is 1).
pub fn eval_p(ctx: &EvalContext, sign: Sign, row: usize, col: usize) -> Result<Jet> {
    Position::new(row, col, ctx.n())?;
    let other_row = match sign {
        Sign::Plus => {
            if row + 1 > ctx.n() {
                return Err(Error::InvalidPosition { row: row + 1, col, n: ctx.n() });
            }
            row + 1
        }
        Sign::Minus => row - 1,
    };
    let this = ctx.coord(row, col)?;
    let mut acc = Jet::constant(Rat::one(), ctx.opts.working_order());
    for j in ctx.opts.p_factor_cols(sign, row) {
        acc = &acc * &(&this - &ctx.coord(other_row, j)?);
    }
    Ok(acc)
}

/// Row product `q` at the shifted point: product of the differences
/// between the entry at `(row, col)` and the other entries of its row.
pub fn eval_q(ctx: &EvalContext, row: usize, col: usize) -> Result<Jet> {
    Position::new(row, col, ctx.n())?;
    let this = ctx.coord(row, col)?;
    let mut acc = Jet::constant(Rat::one(), ctx.opts.working_order());
    for j in 1..=row {
        if j == col {
            continue;
        }
        acc = &acc * &(&this - &ctx.coord(row, j)?);
    }
    if acc.is_zero() {
        // q only vanishes identically along the path when the point is
        // critical in this row and no path resolves it.
        return Err(Error::PoleWithoutPath { row });
    }
    Ok(acc)
}

/// `q` with its vanishing pair factor removed: for `col = i` the factor
/// `x - y` is divided out, for `col = j` the factor `y - x`. Only defined
/// on the singular row of the attached pair.
pub fn eval_qstar(ctx: &EvalContext, row: usize, col: usize) -> Result<Jet> {
    let pair = *ctx.pair().ok_or_else(|| {
        Error::InvalidSpec("q* requested without a singular pair".into())
    })?;
    if row != pair.row || (col != pair.i && col != pair.j) {
        return Err(Error::InvalidSpec(format!(
            "q* is only defined at the singular pair row; got ({row},{col}), pair ({},{},{})",
            pair.row, pair.i, pair.j
        )));
    }
    let q = eval_q(ctx, row, col)?;
    let mut xy = ctx.xy_jet()?;
    if col == pair.j {
        xy = -xy;
    }
    q.div(&xy, ctx.opts.floor)
}

/// Sum of the entries of a row at the shifted point; row 0 is the empty
/// sum.
pub fn eval_rowsum(ctx: &EvalContext, row: usize) -> Result<Jet> {
    let order = ctx.opts.working_order();
    if row > ctx.n() {
        return Err(Error::InvalidPosition { row, col: 1, n: ctx.n() });
    }
    let mut acc = Jet::zero(order);
    for col in 1..=row {
        acc = &acc + &ctx.coord(row, col)?;
    }
    Ok(acc)
}

/// The row invariant through which the Gelfand-Tsetlin subalgebra acts:
/// `sum_a (entry(m,a) + m - 1)^t * prod_{b != a} (1 - 1/(entry(m,a) - entry(m,b)))`.
///
/// Despite the quotient form this is a polynomial in the row, so the jet
/// along a critical path is always regular.
pub fn eval_gamma(ctx: &EvalContext, m: usize, t: usize) -> Result<Jet> {
    if !(1 <= t && t <= m && m <= ctx.n()) {
        return Err(Error::InvalidSpec(format!(
            "row invariant indices need 1 <= t <= m <= n, got (m,t)=({m},{t}), n={}",
            ctx.n()
        )));
    }
    let order = ctx.opts.working_order();
    let shift = Jet::constant(ctx.opts.gamma_shift(m), order);
    let one = Jet::constant(Rat::one(), order);
    let mut total = Jet::zero(order);
    for a in 1..=m {
        let base = &ctx.coord(m, a)? + &shift;
        let mut term = one.clone();
        for _ in 0..t {
            term = &term * &base;
        }
        for b in 1..=m {
            if b == a {
                continue;
            }
            let diff = &ctx.coord(m, a)? - &ctx.coord(m, b)?;
            if diff.is_zero() {
                return Err(Error::PoleWithoutPath { row: m });
            }
            let inv = one.div(&diff, ctx.opts.floor)?;
            term = &term * &(&one - &inv);
        }
        total = &total + &term;
    }
    Ok(total)
}

/// Rational-function expressions over the named evaluables, used by the
/// derivative operator and the identity checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(Rat),
    /// The coordinate function at `(row, col)`.
    Coord(usize, usize),
    P(Sign, usize, usize),
    Q(usize, usize),
    QStar(usize, usize),
    RowSum(usize),
    Gamma(usize, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn coord(row: usize, col: usize) -> Expr {
        Expr::Coord(row, col)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Rat::from_int(n))
    }

    /// Applies the pair involution at the level of indices: coordinates
    /// and interlacing products swap columns `i` and `j` of the singular
    /// row, symmetric row functions are fixed.
    pub fn tau(&self, pair: &SingularPair) -> Expr {
        let swap = |row: usize, col: usize| -> (usize, usize) {
            if row == pair.row && col == pair.i {
                (row, pair.j)
            } else if row == pair.row && col == pair.j {
                (row, pair.i)
            } else {
                (row, col)
            }
        };
        match self {
            Expr::Const(c) => Expr::Const(c.clone()),
            Expr::Coord(r, c) => {
                let (r, c) = swap(*r, *c);
                Expr::Coord(r, c)
            }
            Expr::P(sign, r, c) => {
                let (r, c) = swap(*r, *c);
                Expr::P(*sign, r, c)
            }
            Expr::Q(r, c) => {
                let (r, c) = swap(*r, *c);
                Expr::Q(r, c)
            }
            Expr::QStar(r, c) => {
                let (r, c) = swap(*r, *c);
                Expr::QStar(r, c)
            }
            Expr::RowSum(r) => Expr::RowSum(*r),
            Expr::Gamma(m, t) => Expr::Gamma(*m, *t),
            Expr::Neg(e) => Expr::Neg(Box::new(e.tau(pair))),
            Expr::Add(a, b) => Expr::Add(Box::new(a.tau(pair)), Box::new(b.tau(pair))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.tau(pair)), Box::new(b.tau(pair))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.tau(pair)), Box::new(b.tau(pair))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.tau(pair)), Box::new(b.tau(pair))),
        }
    }
}

/// Evaluates an expression as a jet along the context's path.
pub fn eval_expr(ctx: &EvalContext, expr: &Expr) -> Result<Jet> {
    let floor = ctx.opts.floor;
    let jet = match expr {
        Expr::Const(c) => Jet::constant(c.clone(), ctx.opts.working_order()),
        Expr::Coord(row, col) => ctx.coord(*row, *col)?,
        Expr::P(sign, row, col) => eval_p(ctx, *sign, *row, *col)?,
        Expr::Q(row, col) => eval_q(ctx, *row, *col)?,
        Expr::QStar(row, col) => eval_qstar(ctx, *row, *col)?,
        Expr::RowSum(row) => eval_rowsum(ctx, *row)?,
        Expr::Gamma(m, t) => eval_gamma(ctx, *m, *t)?,
        Expr::Neg(e) => -eval_expr(ctx, e)?,
        Expr::Add(a, b) => &eval_expr(ctx, a)? + &eval_expr(ctx, b)?,
        Expr::Sub(a, b) => &eval_expr(ctx, a)? - &eval_expr(ctx, b)?,
        Expr::Mul(a, b) => {
            let out = &eval_expr(ctx, a)? * &eval_expr(ctx, b)?;
            out.check_floor(floor)?;
            out
        }
        Expr::Div(a, b) => eval_expr(ctx, a)?.div(&eval_expr(ctx, b)?, floor)?,
    };
    Ok(jet)
}

/// The directional derivative `D(expr)` at the shifted point: the `e^1`
/// coefficient of the expression's jet. Errors if the expression is not
/// regular along the path.
pub fn d_of(ctx: &EvalContext, expr: &Expr) -> Result<Rat> {
    let jet = eval_expr(ctx, expr)?;
    if !jet.is_regular() {
        return Err(Error::IrregularCoefficient {
            context: format!("{expr:?}"),
            jet: jet.to_string(),
        });
    }
    jet.coeff(1)
}

// ---------------------------------------------------------------------------
// Rational fast paths
//
// The same products evaluated directly at a rational point, used by the
// module action when no denominator can vanish. The factor structure is
// shared with the jet route through `EvalOptions`, so a formula mutation
// hits both.

pub fn rat_p(w: &Tableau, sign: Sign, row: usize, col: usize, opts: &EvalOptions) -> Result<Rat> {
    Position::new(row, col, w.n())?;
    let other_row = match sign {
        Sign::Plus => {
            if row + 1 > w.n() {
                return Err(Error::InvalidPosition { row: row + 1, col, n: w.n() });
            }
            row + 1
        }
        Sign::Minus => row - 1,
    };
    let this = w.entry(row, col);
    let mut acc = Rat::one();
    for j in opts.p_factor_cols(sign, row) {
        acc *= &(this - w.entry(other_row, j));
    }
    Ok(acc)
}

pub fn rat_q(w: &Tableau, row: usize, col: usize) -> Result<Rat> {
    Position::new(row, col, w.n())?;
    let this = w.entry(row, col);
    let mut acc = Rat::one();
    for j in 1..=row {
        if j == col {
            continue;
        }
        acc *= &(this - w.entry(row, j));
    }
    if acc.is_zero() {
        return Err(Error::PoleWithoutPath { row });
    }
    Ok(acc)
}

pub fn rat_rowsum(w: &Tableau, row: usize) -> Rat {
    if row == 0 {
        return Rat::zero();
    }
    w.row(row).iter().cloned().sum()
}

pub fn rat_gamma(w: &Tableau, m: usize, t: usize, opts: &EvalOptions) -> Result<Rat> {
    if !(1 <= t && t <= m && m <= w.n()) {
        return Err(Error::InvalidSpec(format!(
            "row invariant indices need 1 <= t <= m <= n, got (m,t)=({m},{t}), n={}",
            w.n()
        )));
    }
    let shift = opts.gamma_shift(m);
    let mut total = Rat::zero();
    for a in 1..=m {
        let mut term = (w.entry(m, a) + &shift).pow(t as u32);
        for b in 1..=m {
            if b == a {
                continue;
            }
            let diff = w.entry(m, a) - w.entry(m, b);
            if diff.is_zero() {
                return Err(Error::PoleWithoutPath { row: m });
            }
            term *= &(Rat::one() - Rat::one().checked_div(&diff)?);
        }
        total += &term;
    }
    Ok(total)
}
