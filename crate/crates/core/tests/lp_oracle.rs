use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rec_sizer::lp::{duality_gap, solve_lp, LinearProgram, LpStatus, Sense};

/// Best vertex of `{x : A x ≤ b, 0 ≤ x ≤ u}` by enumerating every choice
/// of `n` tight constraints.
fn vertex_oracle(c: &[f64], a: &[Vec<f64>], b: &[f64], u: &[f64]) -> Option<f64> {
    let n = c.len();
    // every constraint as (row, rhs) in `row·x ≤ rhs` form
    let mut cons: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = -1.0;
        cons.push((e.clone(), 0.0));
        e[j] = 1.0;
        cons.push((e, u[j]));
    }
    let mut best: Option<f64> = None;
    let k = cons.len();
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        if let Some(x) = solve_square(&pick.iter().map(|&i| cons[i].clone()).collect::<Vec<_>>()) {
            let feasible = cons.iter().all(|(row, rhs)| {
                row.iter().zip(&x).map(|(a, x)| a * x).sum::<f64>() <= rhs + 1e-9
            });
            if feasible {
                let v: f64 = c.iter().zip(&x).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < k - n + i {
                pick[i] += 1;
                for t in i + 1..n {
                    pick[t] = pick[t - 1] + 1;
                }
                break;
            }
        }
    }
}

fn solve_square(rows: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let n = rows.len();
    let mut m: Vec<Vec<f64>> = rows
        .iter()
        .map(|(r, b)| {
            let mut r = r.clone();
            r.push(*b);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..=n {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

fn random_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let c = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
    let a = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if rng.gen_bool(0.7) {
                        rng.gen_range(-1.0..3.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let b = (0..m).map(|_| rng.gen_range(0.5..5.0)).collect();
    let u = (0..n).map(|_| rng.gen_range(1.0..4.0)).collect();
    (c, a, b, u)
}

#[test]
fn matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let n = rng.gen_range(1..=5);
        let m = rng.gen_range(1..=6);
        let (c, a, b, u) = random_instance(&mut rng, n, m);
        let lp = LinearProgram::from_dense(
            c.clone(),
            &a,
            &vec![Sense::Le; m],
            &b,
            vec![0.0; n],
            u.clone(),
        );
        let sol = solve_lp(&lp).unwrap();
        // b > 0 keeps the origin feasible
        assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
        let oracle = vertex_oracle(&c, &a, &b, &u).unwrap();
        assert!(
            (sol.objective - oracle).abs() < 1e-8,
            "case {case}: {} vs {oracle}",
            sol.objective
        );
        assert!(lp.primal_residual(&sol.x) <= 1e-7);
        assert!(duality_gap(&lp, &sol).unwrap() <= 1e-7);
    }
}

/// Random programs mixing all row senses, free variables and equalities,
/// built around a known feasible point.
fn mixed_instance(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LinearProgram {
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
    let mut lp = LinearProgram::new();
    for &x in &x0 {
        let free = rng.gen_bool(0.15);
        let lo = if free {
            f64::NEG_INFINITY
        } else {
            0.0f64.min(x)
        };
        let hi = if free {
            f64::INFINITY
        } else {
            x + rng.gen_range(0.0..3.0)
        };
        lp.add_var(rng.gen_range(-2.0..2.0), lo, hi);
    }
    for _ in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.4) {
                coeffs.push((j, rng.gen_range(-2.0..2.0)));
            }
        }
        let act: f64 = coeffs.iter().map(|&(j, v)| v * x0[j]).sum();
        match rng.gen_range(0..3) {
            0 => lp.add_constraint(coeffs, Sense::Le, act + rng.gen_range(0.0..1.0)),
            1 => lp.add_constraint(coeffs, Sense::Ge, act - rng.gen_range(0.0..1.0)),
            _ => lp.add_constraint(coeffs, Sense::Eq, act),
        };
    }
    // a box around the free variables keeps the program bounded
    for j in 0..n {
        if lp.lower[j].is_infinite() {
            lp.add_constraint(vec![(j, 1.0)], Sense::Le, 10.0);
            lp.add_constraint(vec![(j, 1.0)], Sense::Ge, -10.0);
        }
    }
    lp
}

#[test]
fn mixed_programs_certify_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..60 {
        let n = rng.gen_range(5..=40);
        let m = rng.gen_range(3..=40);
        let lp = mixed_instance(&mut rng, n, m);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
        assert!(lp.primal_residual(&sol.x) <= 1e-7, "case {case}");
        for (row, &y) in lp.constraints.iter().zip(&sol.y) {
            match row.sense {
                Sense::Le => assert!(y >= -1e-7, "case {case}"),
                Sense::Ge => assert!(y <= 1e-7, "case {case}"),
                Sense::Eq => {}
            }
        }
        let gap = duality_gap(&lp, &sol).unwrap();
        assert!(gap <= 1e-7, "case {case}: gap {gap}");
    }
}

#[test]
fn beale_cycling_example() {
    // classic instance on which textbook Dantzig pricing cycles
    let mut lp = LinearProgram::new();
    let inf = f64::INFINITY;
    let x4 = lp.add_var(0.75, 0.0, inf);
    let x5 = lp.add_var(-20.0, 0.0, inf);
    let x6 = lp.add_var(0.5, 0.0, inf);
    let x7 = lp.add_var(-6.0, 0.0, inf);
    lp.add_constraint(
        vec![(x4, 0.25), (x5, -8.0), (x6, -1.0), (x7, 9.0)],
        Sense::Le,
        0.0,
    );
    lp.add_constraint(
        vec![(x4, 0.5), (x5, -12.0), (x6, -0.5), (x7, 3.0)],
        Sense::Le,
        0.0,
    );
    lp.add_constraint(vec![(x6, 1.0)], Sense::Le, 1.0);
    let sol = solve_lp(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective - 1.25).abs() < 1e-9);
}

#[test]
fn deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lp = mixed_instance(&mut rng, 30, 25);
    let a = solve_lp(&lp).unwrap();
    let b = solve_lp(&lp).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn cost_scaling(seed in 0u64..500, scale in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, a, b, u) = random_instance(&mut rng, 4, 4);
        let lp = LinearProgram::from_dense(c.clone(), &a, &[Sense::Le; 4], &b, vec![0.0; 4], u.clone());
        let scaled_c: Vec<f64> = c.iter().map(|c| c * scale).collect();
        let lp2 = LinearProgram::from_dense(scaled_c, &a, &[Sense::Le; 4], &b, vec![0.0; 4], u);
        let s1 = solve_lp(&lp).unwrap();
        let s2 = solve_lp(&lp2).unwrap();
        prop_assert!((s2.objective - scale * s1.objective).abs() <= 1e-8 * scale.max(1.0));
        // the optimum of one is optimal for the other
        prop_assert!((lp.objective_value(&s2.x) - s1.objective).abs() <= 1e-8);
    }

    #[test]
    fn infeasible_bounds_detected(lo in 1.0f64..5.0, gap in 0.01f64..3.0) {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, 10.0);
        let y = lp.add_var(-1.0, 0.0, 10.0);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Sense::Ge, lo);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Sense::Le, lo - gap);
        prop_assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }
}
