//! Sequential-counter encoding of `lo <= popcount(xs) <= hi`.
//!
//! `s[i][j]` is true iff at least `j` of the first `i` indicators are true. The
//! counter is defined in both directions so every model of the clauses
//! projects onto an assignment of `xs` within the bounds, and every such
//! assignment extends to exactly one model.

use super::{CnfBuilder, Lit};
use crate::error::{Error, Result};

#[derive(Clone, Copy)]
enum Sum {
    True,
    False,
    Var(Lit),
}

pub fn encode_cardinality(builder: &mut CnfBuilder, xs: &[Lit], lo: usize, hi: usize) -> Result<()> {
    let n = xs.len();
    if lo > hi || hi > n {
        return Err(Error::CardinalityBounds { lo, hi, n });
    }
    // largest partial count that any bound refers to
    let top = if hi < n { hi + 1 } else { lo };
    if top == 0 {
        return Ok(());
    }

    // prev[j] = s[i-1][j] for j in 0..=top
    let mut prev: Vec<Sum> = (0..=top).map(|j| if j == 0 { Sum::True } else { Sum::False }).collect();
    for (i, &x) in xs.iter().enumerate() {
        let i = i + 1;
        let mut cur = vec![Sum::True; top + 1];
        for j in 1..=top {
            if j > i {
                cur[j] = Sum::False;
                continue;
            }
            let s = builder.new_var();
            cur[j] = Sum::Var(s);
            let (keep, carry) = (prev[j], prev[j - 1]);

            // s[i-1][j] -> s[i][j]
            if let Sum::Var(a) = keep {
                builder.add_clause(vec![-a, s]);
            }
            // s[i-1][j-1] & x -> s[i][j]
            match carry {
                Sum::True => builder.add_clause(vec![-x, s]),
                Sum::Var(b) => builder.add_clause(vec![-b, -x, s]),
                Sum::False => {}
            }
            // s[i][j] -> s[i-1][j] | s[i-1][j-1]
            if !matches!(carry, Sum::True) {
                let mut c = vec![-s];
                c.extend([keep, carry].into_iter().filter_map(as_lit));
                builder.add_clause(c);
            }
            // s[i][j] -> s[i-1][j] | x
            let mut c = vec![-s];
            c.extend(as_lit(keep));
            c.push(x);
            builder.add_clause(c);
        }
        prev = cur;
    }

    if lo > 0 {
        assert_sum(builder, prev[lo], true);
    }
    if hi < n {
        assert_sum(builder, prev[hi + 1], false);
    }
    Ok(())
}

fn as_lit(s: Sum) -> Option<Lit> {
    match s {
        Sum::Var(v) => Some(v),
        _ => None,
    }
}

fn assert_sum(builder: &mut CnfBuilder, s: Sum, value: bool) {
    match (s, value) {
        (Sum::Var(v), true) => builder.add_clause(vec![v]),
        (Sum::Var(v), false) => builder.add_clause(vec![-v]),
        (Sum::True, true) | (Sum::False, false) => {}
        // only reachable with n == 0, which the bound check rules out
        _ => {
            let v = builder.new_var();
            builder.add_clause(vec![v]);
            builder.add_clause(vec![-v]);
        }
    }
}
