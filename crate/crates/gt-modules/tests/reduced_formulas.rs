//! Cross-check of the singular action against the uniform one-line form
//! of the reduced formulas.
//!
//! The case-split displays implemented by the engine can be summarized,
//! for the symmetric tags, as a single sum over the whole row in which
//! every coefficient is read off `p(. ) / (q(.)/(x-y))`: the derivative
//! coefficient feeds the symmetric target and the value coefficient feeds
//! the antisymmetric one. That uniform expression is not what the engine
//! computes, so it makes a useful independent oracle: the identified pair
//! targets must collapse to the implemented factor-2 terms, and away from
//! the pair row the antisymmetric coefficient must vanish.

use gt_modules::engine::{BasisTag, Engine, Generator, ModuleSpec, ModuleVector};
use gt_modules::formulas::{eval_p, eval_q, EvalContext, EvalOptions, Sign};
use gt_modules::rat::Rat;
use gt_modules::tableau::{ShiftVector, SingularPair, Tableau};

fn tab(rows_top_first: &[&[&str]]) -> Tableau {
    let rows = rows_top_first
        .iter()
        .map(|row| row.iter().map(|s| s.parse().unwrap()).collect())
        .collect();
    Tableau::from_rows_top_first(rows).unwrap()
}

fn shift(n: usize, entries: &[(usize, usize, i64)]) -> ShiftVector {
    let mut z = ShiftVector::zero(n).unwrap();
    for &(row, col, val) in entries {
        z = z.bump(row, col, val);
    }
    z
}

/// The summarized raising/lowering action on a symmetric tag, computed
/// directly from jets.
fn summarized_on_sym(
    engine: &Engine,
    v: &Tableau,
    pair: SingularPair,
    z: &ShiftVector,
    raising: bool,
    t: usize,
) -> ModuleVector {
    let opts = *engine.options();
    let ctx = EvalContext::new(v.clone(), z.clone(), Some(pair), opts).unwrap();
    let xy = ctx.xy_jet().unwrap();
    let (sign, p_sign, dir) = if raising {
        (-Rat::one(), Sign::Plus, 1)
    } else {
        (Rat::one(), Sign::Minus, -1)
    };
    let mut out = ModuleVector::zero(engine.spec().clone());
    for s in 1..=t {
        let q_star = eval_q(&ctx, t, s).unwrap().div(&xy, opts.floor).unwrap();
        let f = eval_p(&ctx, p_sign, t, s)
            .unwrap()
            .div(&q_star, opts.floor)
            .unwrap();
        assert!(f.is_regular(), "summarized coefficient must be regular");
        let target = z.bump(t, s, dir);
        out.add_term(BasisTag::Sym(target.clone()), &sign * &f.coeff(1).unwrap())
            .unwrap();
        out.add_term(BasisTag::Alt(target), &sign * &f.coeff(0).unwrap())
            .unwrap();
    }
    out
}

fn check_instance(v: Tableau, pair: SingularPair, shifts: &[ShiftVector]) {
    let engine =
        Engine::with_defaults(ModuleSpec::one_singular(v.clone(), pair).unwrap()).unwrap();
    let n = engine.n();
    for z in shifts {
        let sym = engine.basis_vector(BasisTag::Sym(z.clone())).unwrap();
        for t in 1..n {
            for raising in [true, false] {
                let gen = if raising {
                    Generator::e(t, t + 1)
                } else {
                    Generator::e(t + 1, t)
                };
                let implemented = engine.act(gen, &sym).unwrap();
                let summarized = summarized_on_sym(&engine, &v, pair, z, raising, t);
                assert_eq!(
                    implemented, summarized,
                    "summarized form disagrees for {gen:?} at shift {z:?}"
                );
            }
        }
    }
}

#[test]
fn summarized_display_matches_the_action_gl3() {
    let v = tab(&[&["2", "0", "-2"], &["1", "1"], &["1"]]);
    let pair = SingularPair::new(2, 1, 2, 3).unwrap();
    let shifts = [
        shift(3, &[]),
        shift(3, &[(2, 1, 1)]),
        shift(3, &[(2, 1, 1), (2, 2, -1)]),
        shift(3, &[(1, 1, 2)]),
        shift(3, &[(2, 2, -1), (1, 1, 1)]),
    ];
    check_instance(v, pair, &shifts);
}

#[test]
fn summarized_display_matches_the_action_gl4() {
    let v = tab(&[
        &["3", "1", "-1", "-3"],
        &["5/2", "1/3", "-7/3"],
        &["1/5", "1/5"],
        &["1/7"],
    ]);
    let pair = SingularPair::new(2, 1, 2, 4).unwrap();
    let shifts = [
        shift(4, &[]),
        shift(4, &[(2, 1, 1)]),
        shift(4, &[(3, 2, 1), (2, 1, -1)]),
        shift(4, &[(1, 1, 1), (2, 2, 1)]),
    ];
    check_instance(v, pair, &shifts);
}
