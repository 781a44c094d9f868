//! Single-variable expressions in `t` and their order-4 jets.

mod jet;
mod parse;

use std::fmt;

use crate::error::{Error, Result};

pub use jet::{Jet4, MAX_ORDER};
pub use parse::parse;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Coth,
    Abs,
}

impl Func {
    pub const ALL: [Func; 11] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Coth,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Coth => "coth",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// Expression tree over the single free variable `t`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Pi,
    E,
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Power with a constant exponent.
    Pow(Box<Expr>, f64),
    Apply(Func, Box<Expr>),
}

impl Expr {
    pub fn apply(f: Func, arg: Expr) -> Expr {
        Expr::Apply(f, Box::new(arg))
    }

    pub fn pow(base: Expr, exponent: f64) -> Expr {
        Expr::Pow(Box::new(base), exponent)
    }

    /// Jet of the expression at `t` with derivatives up to `order`.
    pub fn eval_jet(&self, t: f64, order: usize) -> Result<Jet4> {
        if order > MAX_ORDER {
            return Err(Error::OrderTooHigh(order));
        }
        let j = self.jet(t, order)?;
        if !j.is_finite() {
            return Err(Error::Domain { what: "non-finite result", at: t });
        }
        Ok(j)
    }

    /// Plain value at `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.eval_jet(t, 0).map(|j| j.value())
    }

    /// The n-th derivative at `t`.
    pub fn derivative(&self, t: f64, n: usize) -> Result<f64> {
        self.eval_jet(t, n).map(|j| j.derivative(n))
    }

    fn jet(&self, t: f64, order: usize) -> Result<Jet4> {
        let domain = |what: &'static str| Error::Domain { what, at: t };
        Ok(match self {
            Expr::Const(c) => Jet4::constant(*c, order),
            Expr::Pi => Jet4::constant(std::f64::consts::PI, order),
            Expr::E => Jet4::constant(std::f64::consts::E, order),
            Expr::Var => Jet4::variable(t, order),
            Expr::Neg(x) => -x.jet(t, order)?,
            Expr::Add(l, r) => l.jet(t, order)? + r.jet(t, order)?,
            Expr::Sub(l, r) => l.jet(t, order)? - r.jet(t, order)?,
            Expr::Mul(l, r) => l.jet(t, order)? * r.jet(t, order)?,
            Expr::Div(l, r) => l.jet(t, order)?.try_div(r.jet(t, order)?).map_err(domain)?,
            Expr::Pow(b, p) => b.jet(t, order)?.try_powf(*p).map_err(domain)?,
            Expr::Apply(f, x) => {
                let u = x.jet(t, order)?;
                match f {
                    Func::Sin => u.sin_cos().0,
                    Func::Cos => u.sin_cos().1,
                    Func::Tan => {
                        let (s, c) = u.sin_cos();
                        s.try_div(c).map_err(|_| domain("tan at a pole"))?
                    }
                    Func::Exp => u.exp(),
                    Func::Log => u.try_ln().map_err(domain)?,
                    Func::Sqrt => u.try_sqrt().map_err(domain)?,
                    Func::Sinh => u.sinh_cosh().0,
                    Func::Cosh => u.sinh_cosh().1,
                    Func::Tanh => {
                        let (s, c) = u.sinh_cosh();
                        s.try_div(c).map_err(domain)?
                    }
                    Func::Coth => {
                        let (s, c) = u.sinh_cosh();
                        c.try_div(s).map_err(|_| domain("coth at 0"))?
                    }
                    Func::Abs => {
                        if order > 0 {
                            return Err(Error::NonSmooth { what: "abs", at: t });
                        }
                        Jet4::constant(u.value().abs(), 0)
                    }
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Neg(..) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let paren = self.precedence() < min_prec;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Const(c) => write!(f, "{c}")?,
            Expr::Pi => f.write_str("pi")?,
            Expr::E => f.write_str("e")?,
            Expr::Var => f.write_str("t")?,
            Expr::Neg(x) => {
                f.write_str("-")?;
                x.write_at(f, 4)?;
            }
            Expr::Add(l, r) | Expr::Sub(l, r) => {
                l.write_at(f, 1)?;
                f.write_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                r.write_at(f, 2)?;
            }
            Expr::Mul(l, r) | Expr::Div(l, r) => {
                l.write_at(f, 2)?;
                f.write_str(if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                r.write_at(f, 3)?;
            }
            Expr::Pow(b, p) => {
                b.write_at(f, 4)?;
                write!(f, "^{p}")?;
            }
            Expr::Apply(func, x) => {
                write!(f, "{}(", func.name())?;
                x.write_at(f, 0)?;
                f.write_str(")")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Canonical printer; `parse(&e.to_string())` reproduces `e` for every tree
/// whose constants and exponents are finite and non-negative.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(src: &str, t: f64, order: usize) -> Vec<f64> {
        parse(src).unwrap().eval_jet(t, order).unwrap().as_slice().to_vec()
    }

    #[test]
    fn monomial_jet() {
        assert_eq!(jet("t^4", 1.0, 4), vec![1.0, 4.0, 12.0, 24.0, 24.0]);
    }

    #[test]
    fn cosh_jet_at_zero() {
        assert_eq!(jet("cosh(t)", 0.0, 2), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn coth_over_t_value() {
        let v = jet("coth(t)/t", 1.0, 0)[0];
        // coth(1) to 16 digits
        assert!((v - 1.313035285499331).abs() < 1e-15);
    }

    #[test]
    fn entries_above_order_are_unset() {
        let j = parse("sin(t)").unwrap().eval_jet(0.3, 2).unwrap();
        assert_eq!(j.get(3), None);
        assert!(parse("t").unwrap().eval_jet(0.0, 5).is_err());
    }

    #[test]
    fn domain_errors() {
        let e = parse("log(t)").unwrap();
        assert!(matches!(e.eval(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(e.eval(0.0), Err(Error::Domain { .. })));
        assert!(matches!(parse("coth(t)").unwrap().eval(0.0), Err(Error::Domain { .. })));
        assert!(matches!(parse("1/t").unwrap().eval(0.0), Err(Error::Domain { .. })));
        assert!(matches!(parse("(t - 1)^0.5").unwrap().eval(0.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn abs_has_value_only() {
        let e = parse("abs(t)").unwrap();
        assert_eq!(e.eval(-2.0).unwrap(), 2.0);
        assert!(matches!(e.eval_jet(1.0, 1), Err(Error::NonSmooth { .. })));
        assert!(matches!(e.eval_jet(0.0, 2), Err(Error::NonSmooth { .. })));
    }

    #[test]
    fn tan_and_tanh() {
        let t = 0.4f64;
        let j = parse("tan(t)").unwrap().eval_jet(t, 2).unwrap();
        let sec2 = 1.0 / t.cos().powi(2);
        assert!((j.derivative(1) - sec2).abs() < 1e-14);
        assert!((j.derivative(2) - 2.0 * sec2 * t.tan()).abs() < 1e-13);
        let h = parse("tanh(t)").unwrap().eval_jet(t, 1).unwrap();
        assert!((h.derivative(1) - (1.0 - t.tanh().powi(2))).abs() < 1e-15);
    }

    #[test]
    fn printer_examples() {
        for (src, printed) in [
            ("t^4", "t^4"),
            ("coth(t)/t", "coth(t)/t"),
            ("-t^2", "-t^2"),
            ("-(t^2)", "-(t^2)"),
            ("1 - (2 - t)", "1 - (2 - t)"),
            ("(1 - 2) - t", "1 - 2 - t"),
            ("t/(2*t)", "t/(2*t)"),
            ("(t*t)^3", "(t*t)^3"),
            ("- -t", "--t"),
            ("2.5e-3*pi", "0.0025*pi"),
        ] {
            let e = parse(src).unwrap();
            assert_eq!(e.to_string(), printed, "{src}");
            assert_eq!(parse(printed).unwrap(), e);
        }
    }
}
