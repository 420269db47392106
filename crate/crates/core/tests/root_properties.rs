mod common;

use common::{any_model, complex};
use nalgebra::DMatrix;
use nonbloch::eigen::eig;
use nonbloch::polyroots::aberth_roots;
use nonbloch::{char_poly_coeffs, sorted_roots, C64};
use proptest::prelude::*;

/// Coefficients of `lead·∏(β - r)`, lowest power first.
fn expand(roots: &[C64], lead: C64) -> Vec<C64> {
    let mut c = vec![lead];
    for &r in roots {
        let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
        for (j, &a) in c.iter().enumerate() {
            next[j + 1] += a;
            next[j] -= a * r;
        }
        c = next;
    }
    c
}

fn coefficients() -> impl Strategy<Value = Vec<C64>> {
    (2usize..=12)
        .prop_flat_map(|d| proptest::collection::vec(complex(1.0), d + 1))
        .prop_filter("leading coefficient bounded away from zero", |c| {
            c.last().unwrap().norm() > 0.1
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roots_rebuild_the_polynomial(c in coefficients()) {
        let roots = aberth_roots(&c).unwrap();
        prop_assert_eq!(roots.len(), c.len() - 1);
        let rebuilt = expand(&roots, *c.last().unwrap());
        let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (a, b) in rebuilt.iter().zip(&c) {
            prop_assert!((a - b).norm() < 1e-8 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn roots_agree_with_companion_eigenvalues(c in coefficients()) {
        let d = c.len() - 1;
        let lead = *c.last().unwrap();
        let companion = DMatrix::from_fn(d, d, |i, j| {
            if j == d - 1 {
                -c[i] / lead
            } else if i == j + 1 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let values = eig(&companion).unwrap().values;
        let roots = aberth_roots(&c).unwrap();
        let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
        for r in &roots {
            let nearest = values.iter().map(|v| (v - r).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest < 1e-6 * scale, "root {r} has no eigenvalue nearby ({nearest})");
        }
    }

    #[test]
    fn model_roots_are_sorted_and_accurate(m in any_model(), e in complex(3.0)) {
        let rs = sorted_roots(&m, e).unwrap();
        prop_assert_eq!(rs.degree(), 4 * m.range());
        for w in rs.roots.windows(2) {
            let (a, b) = (w[0].norm(), w[1].norm());
            prop_assert!(a < b || (a == b && w[0].arg() <= w[1].arg()));
        }
        for r in &rs.residuals {
            prop_assert!(*r <= 1e-9);
        }
    }

    #[test]
    fn roots_move_continuously_along_a_path(m in any_model(), e in complex(2.0), dir in complex(1.0)) {
        prop_assume!(dir.norm() > 0.1);
        let step = dir / dir.norm() * 1e-6;
        let a = sorted_roots(&m, e).unwrap();
        let b = sorted_roots(&m, e + step).unwrap();
        prop_assume!(a.infinite == 0 && b.infinite == 0);
        // Every root at the first energy has a partner close by, on the
        // scale of the local root sensitivity.
        let coeffs = char_poly_coeffs(&m, e);
        for r in &a.roots {
            let dp: C64 = coeffs.iter().enumerate().skip(1).map(|(j, c)| c * j as f64 * r.powu(j as u32 - 1)).sum();
            let q = m.range() as u32;
            let sensitivity = (2.0 * e * r.powu(2 * q)).norm() / dp.norm().max(1e-300);
            let moved = b.roots.iter().map(|x| (x - r).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(moved <= 10.0 * sensitivity * step.norm() + 1e-9 * (1.0 + r.norm()));
        }
    }
}
