use std::sync::OnceLock;

use proptest::prelude::*;

use toric_ball::bary::{flag_intersection, FlagCone, Subdivision};
use toric_ball::charts::{theta, theta_preimage, Atlas, DeltaPoint};
use toric_ball::exact::{dual_basis, pair, quotient_projection, rat, rat_frac, to_rat_vec, Rat};
use toric_ball::homeo::{phi_flag, phi_flag_inverse};
use toric_ball::{bundled, Flag};

fn atlas(name: &'static str) -> &'static Atlas {
    static CUBED: OnceLock<Atlas> = OnceLock::new();
    static P112: OnceLock<Atlas> = OnceLock::new();
    let cell = if name == "p1_cubed" { &CUBED } else { &P112 };
    cell.get_or_init(|| Atlas::new(&bundled::fan(name)).unwrap())
}

fn identity(n: usize) -> Vec<Vec<Rat>> {
    (0..n)
        .map(|i| (0..n).map(|j| rat(i64::from(i == j))).collect())
        .collect()
}

fn delta_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(0.0f64..=1.0, n), 0..=n).prop_map(move |(mut w, zeros)| {
        w.sort_by(f64::total_cmp);
        for x in w.iter_mut().take(zeros) {
            *x = 0.0;
        }
        w
    })
}

proptest! {
    #[test]
    fn dual_basis_pairs_to_identity(m in prop::collection::vec(prop::collection::vec(-5i64..=5, 3), 3)) {
        let rows: Vec<Vec<Rat>> = m.iter().map(|r| to_rat_vec(r)).collect();
        if let Ok(beta) = dual_basis(&rows) {
            let got: Vec<Vec<Rat>> = beta
                .iter()
                .map(|b| rows.iter().map(|x| pair(b, x).unwrap()).collect())
                .collect();
            prop_assert_eq!(got, identity(3));
        }
    }

    #[test]
    fn quotient_kills_span_and_is_surjective(g in prop::collection::vec(prop::collection::vec(-4i64..=4, 3), 0..3)) {
        let q = quotient_projection(&g, 3);
        for v in &g {
            prop_assert!(q.project(v).iter().all(|&x| x == 0));
        }
        for i in 0..q.target_rank() {
            let img = q.project(q.section(i));
            let unit: Vec<i64> = (0..q.target_rank()).map(|j| i64::from(i == j)).collect();
            prop_assert_eq!(img, unit);
        }
    }

    #[test]
    fn theta_maps_cube_into_delta(z in prop::collection::vec(0.0f64..=1.0, 1..5)) {
        let w = theta(&z);
        prop_assert!(DeltaPoint::new(w, 0.0).is_ok());
    }

    #[test]
    fn theta_preimage_is_a_section(w in delta_point(4)) {
        let z = theta_preimage(&w);
        prop_assert!(z.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let back = theta(&z);
        for (a, b) in back.iter().zip(&w) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn phi_roundtrip(u in prop::collection::vec(0.0f64..50.0, 1..5)) {
        let back = phi_flag_inverse(&phi_flag(&u));
        for (a, b) in back.iter().zip(&u) {
            prop_assert!((a - b).abs() <= 1e-10 * b.max(1.0));
        }
    }

    #[test]
    fn psi_roundtrip_on_p1_cubed_charts(chart in 0usize..48, w in delta_point(3)) {
        let atlas = atlas("p1_cubed");
        let ch = atlas.chart(chart);
        let back = ch.psi_invert(&ch.psi_eval(&w), 1e-9).unwrap();
        for (a, b) in back.coords().iter().zip(&w) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn psi_roundtrip_on_singular_charts(chart in 0usize..6, w in delta_point(2)) {
        let atlas = atlas("p112");
        let ch = atlas.chart(chart);
        let back = ch.psi_invert(&ch.psi_eval(&w), 1e-9).unwrap();
        for (a, b) in back.coords().iter().zip(&w) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn flag_cones_meet_in_the_common_subflag(
        i in 0usize..24,
        j in 0usize..24,
        x in prop::collection::vec((-6i64..=6, 1i64..=3), 3),
    ) {
        let fan = bundled::fan("p3");
        let sub = Subdivision::new(&fan).unwrap();
        let x: Vec<Rat> = x.iter().map(|&(p, q)| rat_frac(p, q)).collect();
        let common = flag_intersection(&sub.flags[i], &sub.flags[j]);
        let both = sub.cones[i].contains(&x) && sub.cones[j].contains(&x);
        let in_common = FlagCone::new(&fan, &common).unwrap().contains(&x);
        prop_assert_eq!(both, in_common);
    }

    #[test]
    fn subflag_points_have_zero_coordinates_off_the_subflag(
        i in 0usize..48,
        mask in 1u32..8,
        u in prop::collection::vec(0i64..5, 3),
    ) {
        let fan = bundled::fan("p1_cubed");
        let sub = Subdivision::new(&fan).unwrap();
        let flag = &sub.flags[i];
        let keep: Vec<usize> = (0..3).filter(|k| mask >> k & 1 == 1).collect();
        let members: Vec<usize> = keep.iter().map(|&k| flag.cones()[k]).collect();
        let sf = Flag::new(&fan, members).unwrap();
        let mut x = vec![rat(0); 3];
        for (c, b) in u.iter().zip(sf.barycenters(&fan)) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += rat(c * bi);
            }
        }
        let coords = sub.cones[i].simplicial_coords(&x).unwrap();
        for (k, c) in coords.iter().enumerate() {
            if !keep.contains(&k) {
                prop_assert_eq!(c, &rat(0));
            }
        }
    }
}
