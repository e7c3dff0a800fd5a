#![allow(dead_code)]
//! Brute-force oracles shared by the integration tests. Nothing here calls the simplex code.

use noarb::lp::{LowerBound, LpProblem, Relation, Sense};
use noarb::market::MarketModel;
use noarb::num::{one, zero};
use noarb::Rational;
use num_traits::{Signed, Zero};

/// Unique solution of a square system, by Gauss-Jordan elimination.
pub fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = one() / &a[col][col];
        for j in col..n {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..n {
                    let v = &f * &a[col][j];
                    a[r][j] -= v;
                }
                let v = &f * &b[col];
                b[r] -= v;
            }
        }
    }
    Some(b)
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub a: Vec<Rational>,
    pub rel: Relation,
    pub b: Rational,
}

impl Constraint {
    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs: Rational = self.a.iter().zip(x).map(|(p, q)| p * q).sum();
        match self.rel {
            Relation::Le => lhs <= self.b,
            Relation::Eq => lhs == self.b,
            Relation::Ge => lhs >= self.b,
        }
    }
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Every vertex of `{x in R^dim : all constraints}`: points where `dim` of the
/// constraints are tight with a nonsingular system and all others hold.
pub fn vertices(dim: usize, cons: &[Constraint]) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = Vec::new();
    if cons.len() < dim {
        return out;
    }
    for pick in combinations(cons.len(), dim) {
        let a = pick.iter().map(|&i| cons[i].a.clone()).collect();
        let b = pick.iter().map(|&i| cons[i].b.clone()).collect();
        if let Some(x) = solve_square(a, b) {
            if cons.iter().all(|c| c.holds(&x)) && !out.contains(&x) {
                out.push(x);
            }
        }
    }
    out
}

fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![zero(); n];
    v[i] = one();
    v
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Brute {
    Infeasible,
    Unbounded,
    Optimal(Rational),
}

/// Optimum of an LP with nonnegative variables by enumerating basic feasible
/// solutions and the extreme rays of the recession cone.
pub fn brute_force(p: &LpProblem) -> Brute {
    let n = p.objective.len();
    assert!(p.bounds.iter().all(|b| b.lower == LowerBound::NonNegative));
    let mut cons: Vec<Constraint> = (0..p.matrix.len())
        .map(|i| Constraint {
            a: p.matrix[i].clone(),
            rel: p.relations[i],
            b: p.rhs[i].clone(),
        })
        .collect();
    for i in 0..n {
        cons.push(Constraint {
            a: unit(n, i),
            rel: Relation::Ge,
            b: zero(),
        });
        if let Some(u) = &p.bounds[i].upper {
            cons.push(Constraint {
                a: unit(n, i),
                rel: Relation::Le,
                b: u.clone(),
            });
        }
    }
    let points = vertices(n, &cons);
    if points.is_empty() {
        return Brute::Infeasible;
    }
    let gain = |x: &[Rational]| -> Rational {
        let v: Rational = p.objective.iter().zip(x).map(|(c, x)| c * x).sum();
        match p.sense {
            Sense::Maximize => v,
            Sense::Minimize => -v,
        }
    };
    // recession cone cut by sum(d) = 1
    let mut rays: Vec<Constraint> = cons
        .iter()
        .map(|c| Constraint {
            a: c.a.clone(),
            rel: c.rel,
            b: zero(),
        })
        .collect();
    rays.push(Constraint {
        a: vec![one(); n],
        rel: Relation::Eq,
        b: one(),
    });
    if vertices(n, &rays).iter().any(|d| gain(d).is_positive()) {
        return Brute::Unbounded;
    }
    let best = points.iter().map(|x| gain(x)).max().unwrap();
    Brute::Optimal(match p.sense {
        Sense::Maximize => best,
        Sense::Minimize => -best,
    })
}

/// Vertices of the martingale-measure polytope of a one-period model
/// `{q >= 0, sum q = 1, E_q[X_1 - X_0] = 0 for each asset}`.
pub fn martingale_vertices(model: &MarketModel) -> Vec<Vec<Rational>> {
    assert_eq!(model.periods(), 1);
    let n = model.space().len();
    let mut cons = vec![Constraint {
        a: vec![one(); n],
        rel: Relation::Eq,
        b: one(),
    }];
    for asset in model.assets() {
        let a = asset.path[1]
            .values()
            .iter()
            .zip(asset.path[0].values())
            .map(|(x1, x0)| x1 - x0)
            .collect();
        cons.push(Constraint {
            a,
            rel: Relation::Eq,
            b: zero(),
        });
    }
    for i in 0..n {
        cons.push(Constraint {
            a: unit(n, i),
            rel: Relation::Ge,
            b: zero(),
        });
    }
    vertices(n, &cons)
}

pub fn is_nonneg(v: &[Rational]) -> bool {
    v.iter().all(|x| !x.is_negative())
}

/// Random LP with at most six nonnegative variables and six rows; about a
/// quarter of the variables get a finite upper bound.
pub fn random_lp<R: rand::Rng>(rng: &mut R) -> LpProblem {
    use noarb::lab::random_rational;
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=6);
    let sense = if rng.gen_bool(0.5) {
        Sense::Maximize
    } else {
        Sense::Minimize
    };
    let objective = (0..n).map(|_| random_rational(rng, -5, 5)).collect();
    let mut p = LpProblem::new(sense, objective);
    for _ in 0..m {
        let row = (0..n)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    zero()
                } else {
                    random_rational(rng, -5, 5)
                }
            })
            .collect();
        let rel = match rng.gen_range(0..5) {
            0 => Relation::Eq,
            1 => Relation::Ge,
            _ => Relation::Le,
        };
        p.add_row(row, rel, random_rational(rng, -3, 8));
    }
    for i in 0..n {
        if rng.gen_bool(0.25) {
            p.set_upper(i, random_rational(rng, 0, 6));
        }
    }
    p
}
