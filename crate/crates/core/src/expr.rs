//! Arithmetic-expression objectives over variables `x1 … xn`.

use fasteval::{Compiler, Evaler, Instruction, Parser, Slab};

use crate::error::{Error, Result};
use crate::model::BlackBoxObjective;

struct Compiled {
    slab: Slab,
    instr: Instruction,
}

impl Compiled {
    fn eval(&self, x: &[f64]) -> std::result::Result<f64, fasteval::Error> {
        let mut ns = |name: &str, args: Vec<f64>| -> Option<f64> {
            // functions fasteval lacks as built-ins
            match (name, args.as_slice()) {
                ("exp", [a]) => return Some(a.exp()),
                ("sqrt", [a]) => return Some(a.sqrt()),
                ("ln", [a]) => return Some(a.ln()),
                (_, []) => {}
                _ => return None,
            }
            let i: usize = name.strip_prefix('x')?.parse().ok()?;
            if i == 0 {
                return None;
            }
            x.get(i - 1).copied()
        };
        self.instr.eval(&self.slab, &mut ns)
    }
}

/// Compile `source` into an objective of `dimension` variables.
///
/// Unknown identifiers (anything other than `x1 … xn` and the built-in
/// functions) are rejected here rather than at evaluation time.
pub fn parse_expression(source: &str, dimension: usize) -> Result<BlackBoxObjective> {
    let mut slab = Slab::new();
    let instr = Parser::new()
        .parse(source, &mut slab.ps)
        .map_err(|e| Error::schema("objective.expression", e.to_string()))?
        .from(&slab.ps)
        .compile(&slab.ps, &mut slab.cs);
    let compiled = Compiled { slab, instr };
    let probe = vec![0.5; dimension];
    compiled
        .eval(&probe)
        .map_err(|e| Error::schema("objective.expression", format!("{e} (variables are x1..x{dimension})")))?;
    Ok(BlackBoxObjective::new(dimension, source, move |x| {
        compiled.eval(x).unwrap_or(f64::NAN)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_polynomial() {
        let o = parse_expression("x1^2 + 3*x2 - 1", 2).unwrap();
        assert_eq!(o.eval(&[2.0, 1.0]), 6.0);
    }

    #[test]
    fn rejects_unknown_variable() {
        assert!(parse_expression("x1 + y", 1).is_err());
        assert!(parse_expression("x3", 2).is_err());
        assert!(parse_expression("x0", 2).is_err());
    }

    #[test]
    fn rejects_syntax_error() {
        let err = parse_expression("x1 +* 2", 1).unwrap_err();
        assert!(err.to_string().contains("objective.expression"));
    }

    #[test]
    fn builtin_functions() {
        let o = parse_expression("sin(x1) + exp(0) + sqrt(4) - ln(1)", 1).unwrap();
        assert!((o.eval(&[0.0]) - 3.0).abs() < 1e-15);
    }
}
