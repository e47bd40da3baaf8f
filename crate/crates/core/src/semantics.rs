//! Boolean and soft (Lukasiewicz) semantics of ground rules.

use crate::error::{Error, Result};
use crate::logic::{GroundRule, GroundedProgram, Weight};

/// A total boolean assignment indexed by atom id.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct World(pub Vec<bool>);

/// A soft truth assignment in [0, 1] indexed by atom id.
#[derive(Clone, Debug, PartialEq)]
pub struct Interpretation(pub Vec<f64>);

impl Interpretation {
    pub fn from_world(world: &World) -> Self {
        Interpretation(world.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }
}

fn unit(what: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::OutOfRange {
            what: what.to_string(),
            value: v,
        })
    }
}

pub fn soft_and(a: f64, b: f64) -> Result<f64> {
    let (a, b) = (unit("soft_and lhs", a)?, unit("soft_and rhs", b)?);
    // hi - 1 is exact for hi >= 0.5, so a true operand returns the other
    // one bit for bit.
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    Ok(((hi - 1.0) + lo).max(0.0))
}

pub fn soft_or(a: f64, b: f64) -> Result<f64> {
    Ok((unit("soft_or lhs", a)? + unit("soft_or rhs", b)?).min(1.0))
}

pub fn soft_neg(a: f64) -> Result<f64> {
    Ok(1.0 - unit("soft_neg operand", a)?)
}

/// Truth of the implication under a boolean world.
pub fn eval_ground_rule(rule: &GroundRule, world: &World) -> bool {
    rule.satisfied_by(&world.0)
}

/// n_i(x): satisfied groundings per first-order rule.
pub fn count_true_groundings(program: &GroundedProgram, world: &World) -> Vec<usize> {
    let mut counts = vec![0; program.num_first_order_rules()];
    for r in program.rules() {
        if r.satisfied_by(&world.0) {
            counts[r.rule] += 1;
        }
    }
    counts
}

/// Sum over soft rules of w_i n_i(x); `-inf` if a hard rule is violated.
pub fn world_log_weight(program: &GroundedProgram, world: &World) -> f64 {
    let mut total = 0.0;
    for (g, r) in program.rules().iter().enumerate() {
        let sat = r.satisfied_by(&world.0);
        match program.weight_of(g) {
            Weight::Hard => {
                if !sat {
                    return f64::NEG_INFINITY;
                }
            }
            Weight::Soft(w) => {
                if sat {
                    total += w;
                }
            }
        }
    }
    total
}

/// Distance to satisfaction max(0, I(body) - I(head)); an empty body has
/// truth 1.
pub fn rule_distance(rule: &GroundRule, interp: &Interpretation) -> Result<f64> {
    let value = |l: crate::logic::GroundLiteral| -> Result<f64> {
        let v = *interp.0.get(l.atom).ok_or(Error::AtomMissing(l.atom))?;
        if l.negated {
            soft_neg(v)
        } else {
            unit("truth value", v)
        }
    };
    let mut body = 1.0;
    for &l in &rule.body {
        body = soft_and(body, value(l)?)?;
    }
    Ok((body - value(rule.head)?).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{GroundLiteral, ProgramBuilder};

    #[test]
    fn connectives_match_boolean_logic_on_corners() {
        for a in [0.0, 1.0] {
            for b in [0.0, 1.0] {
                let (x, y) = (a == 1.0, b == 1.0);
                assert_eq!(soft_and(a, b).unwrap() == 1.0, x && y);
                assert_eq!(soft_or(a, b).unwrap() == 1.0, x || y);
            }
            assert_eq!(soft_neg(a).unwrap() == 1.0, a == 0.0);
        }
        assert_eq!(soft_and(1.0, 0.6).unwrap(), 0.6);
        assert!(soft_and(1.2, 0.5).is_err());
        assert!(soft_neg(f64::NAN).is_err());
    }

    #[test]
    fn distance_of_implication() {
        let mut b = ProgramBuilder::new();
        let p = b.prop("p");
        let q = b.prop("q");
        b.clause(Weight::Soft(1.0), vec![GroundLiteral::pos(p)], GroundLiteral::pos(q));
        let prog = b.build().unwrap();
        let r = &prog.rules()[0];
        let d = rule_distance(r, &Interpretation(vec![0.9, 0.4])).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert_eq!(rule_distance(r, &Interpretation(vec![0.3, 0.4])).unwrap(), 0.0);
        let w = World(vec![true, false]);
        assert!(!eval_ground_rule(r, &w));
        assert_eq!(world_log_weight(&prog, &w), 0.0);
        assert_eq!(count_true_groundings(&prog, &World(vec![false, false])), vec![1]);
    }
}
