//! Simplex results compared with brute-force vertex enumeration on small,
//! box-bounded programs; infeasibility certificates re-verified.

#![allow(clippy::needless_range_loop)]

use chansim_core::lp::{phase_one_infeasibility, solve, LinearProgram, LpOutcome, Relation};
use proptest::prelude::*;

const BOX: f64 = 5.0;

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    if n < r {
        return vec![];
    }
    let mut out = combinations(n - 1, r);
    for mut c in combinations(n - 1, r - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Best objective over all basic feasible points, or `None` if infeasible.
fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
    let v = lp.vars();
    let mut hyperplanes: Vec<(Vec<f64>, f64)> = lp.constraints().iter().map(|c| (c.coeffs.clone(), c.rhs)).collect();
    for j in 0..v {
        let mut e = vec![0.0; v];
        e[j] = 1.0;
        if lp.is_free(j) {
            hyperplanes.push((e.iter().map(|x| -x).collect(), BOX));
        } else {
            hyperplanes.push((e, 0.0));
        }
    }
    let obj = lp.objective().expect("objective set");
    let sign = match obj.direction {
        chansim_core::lp::Direction::Maximize => 1.0,
        chansim_core::lp::Direction::Minimize => -1.0,
    };
    let mut best: Option<f64> = None;
    for active in combinations(hyperplanes.len(), v) {
        let a = active.iter().map(|&i| hyperplanes[i].0.clone()).collect();
        let b = active.iter().map(|&i| hyperplanes[i].1).collect();
        let Some(x) = solve_square(a, b) else { continue };
        if lp.max_violation(&x) > 1e-9 {
            continue;
        }
        let val = sign * lp.objective_value(&x).unwrap();
        best = Some(best.map_or(val, |b: f64| b.max(val)));
    }
    best.map(|b| sign * b)
}

fn relation(code: u8) -> Relation {
    match code % 3 {
        0 => Relation::Le,
        1 => Relation::Ge,
        _ => Relation::Eq,
    }
}

fn program() -> impl Strategy<Value = LinearProgram> {
    (1usize..=3, 1usize..=4).prop_flat_map(|(v, m)| {
        (
            prop::collection::vec((prop::collection::vec(-3i32..=3, v), any::<u8>(), -4i32..=4), m),
            prop::collection::vec(-3i32..=3, v),
            prop::collection::vec(any::<bool>(), v),
            any::<bool>(),
        )
            .prop_map(move |(rows, obj, free, maximize)| {
                let mut lp = LinearProgram::new(v);
                for (j, &f) in free.iter().enumerate() {
                    if f {
                        lp.set_free(j);
                        let mut lower = vec![0.0; v];
                        lower[j] = 1.0;
                        lp.add_constraint(lower, Relation::Ge, -BOX).unwrap();
                    }
                    let mut upper = vec![0.0; v];
                    upper[j] = 1.0;
                    lp.add_constraint(upper, Relation::Le, BOX).unwrap();
                }
                for (coeffs, rel, rhs) in rows {
                    lp.add_constraint(coeffs.into_iter().map(f64::from).collect(), relation(rel), f64::from(rhs))
                        .unwrap();
                }
                let obj: Vec<f64> = obj.into_iter().map(f64::from).collect();
                if maximize {
                    lp.maximize(obj).unwrap();
                } else {
                    lp.minimize(obj).unwrap();
                }
                lp
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn simplex_agrees_with_vertex_enumeration(lp in program()) {
        let oracle = vertex_oracle(&lp);
        match (solve(&lp).unwrap(), oracle) {
            (LpOutcome::Optimal { x, objective }, Some(best)) => {
                prop_assert!(lp.max_violation(&x) <= 1e-8);
                prop_assert!((objective - best).abs() <= 1e-7, "simplex {} vs oracle {}", objective, best);
            }
            (LpOutcome::Infeasible(cert), None) => {
                prop_assert!(cert.verify(&lp, 1e-8).is_ok());
                prop_assert!(phase_one_infeasibility(&lp).unwrap() > 0.0);
            }
            (other, oracle) => prop_assert!(false, "simplex {:?} vs oracle {:?}", other, oracle),
        }
    }

    #[test]
    fn certificates_survive_and_tampering_fails(lp in program()) {
        if let LpOutcome::Infeasible(cert) = solve(&lp).unwrap() {
            let gap = cert.verify(&lp, 1e-8).unwrap();
            prop_assert!(gap > 0.0);
            let mut bad = cert.clone();
            bad.multipliers.iter_mut().for_each(|y| *y = -*y);
            prop_assert!(bad.verify(&lp, 1e-8).is_err());
        }
    }
}

#[test]
fn redundant_equalities_are_handled() {
    let mut lp = LinearProgram::new(3);
    lp.add_constraint(vec![1.0, 1.0, 1.0], Relation::Eq, 1.0).unwrap();
    lp.add_constraint(vec![2.0, 2.0, 2.0], Relation::Eq, 2.0).unwrap();
    lp.add_constraint(vec![1.0, 0.0, 0.0], Relation::Ge, 0.25).unwrap();
    lp.maximize(vec![0.0, 1.0, 2.0]).unwrap();
    let LpOutcome::Optimal { x, objective } = solve(&lp).unwrap() else { panic!() };
    assert!((objective - 1.5).abs() < 1e-12, "{x:?}");
}

#[test]
fn degenerate_cycling_example_terminates() {
    // Beale's classic cycling program
    let mut lp = LinearProgram::new(4);
    lp.add_constraint(vec![0.25, -8.0, -1.0, 9.0], Relation::Le, 0.0).unwrap();
    lp.add_constraint(vec![0.5, -12.0, -0.5, 3.0], Relation::Le, 0.0).unwrap();
    lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0).unwrap();
    lp.maximize(vec![0.75, -20.0, 0.5, -6.0]).unwrap();
    let LpOutcome::Optimal { objective, .. } = solve(&lp).unwrap() else { panic!() };
    assert!((objective - 1.25).abs() < 1e-9);
}
