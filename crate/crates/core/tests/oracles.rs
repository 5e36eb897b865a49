mod support;

use std::collections::BTreeSet;

use support::oracle::{check_hilbert, rank};
use toric_ball::bary::{enumerate_flags, Subdivision};
use toric_ball::charts::Atlas;
use toric_ball::complex::{BallModel, ORIGIN};
use toric_ball::exact::{quotient_projection, to_rat_vec};
use toric_ball::homeo::{param_boundary_point, BaryPoint};
use toric_ball::{bundled, hilbert_basis, Flag};

#[test]
fn hilbert_bases_match_brute_force() {
    for (name, fan) in bundled::all() {
        for s in 0..fan.num_cones() {
            let rays = &fan.cone(s).generators;
            let hb = hilbert_basis(&fan, s);
            let v = check_hilbert(rays, fan.dim(), &hb.elements);
            assert!(v.generated, "{name} cone {:?}: not generated", fan.cone(s).rays);
            assert!(v.minimal, "{name} cone {:?}: not minimal", fan.cone(s).rays);
            if let Some(irr) = v.irreducibles {
                let got: BTreeSet<Vec<i64>> = hb.elements.iter().cloned().collect();
                assert_eq!(got, irr, "{name} cone {:?}", fan.cone(s).rays);
            }
        }
    }
}

#[test]
fn singular_cone_of_p112() {
    let fan = bundled::fan("p112");
    // cone((1,0),(−1,−2)) has determinant −2
    let s = fan.cone_index(&[0, 2]).unwrap();
    let hb = hilbert_basis(&fan, s);
    let got: BTreeSet<Vec<i64>> = hb.elements.iter().cloned().collect();
    assert_eq!(got, BTreeSet::from([vec![0, -1], vec![1, -1], vec![2, -1]]));
}

/// Chains of nonzero cones enumerated straight from the face relation.
fn chains(fan: &toric_ball::Fan) -> BTreeSet<Vec<usize>> {
    let mut out: BTreeSet<Vec<usize>> = BTreeSet::from([vec![]]);
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    while let Some(c) = frontier.pop() {
        for t in 1..fan.num_cones() {
            let ok = c.last().is_none_or(|&l| l != t && fan.is_face(l, t));
            if ok {
                let mut d = c.clone();
                d.push(t);
                if out.insert(d.clone()) {
                    frontier.push(d);
                }
            }
        }
    }
    out
}

#[test]
fn ball_model_is_coned_order_complex() {
    for (name, fan) in bundled::all() {
        let model = BallModel::build(&fan);
        let mut expected: BTreeSet<Vec<usize>> = BTreeSet::new();
        for c in chains(&fan) {
            let mut s = c.clone();
            s.sort_unstable();
            if !s.is_empty() {
                expected.insert(s.clone());
            }
            s.insert(0, ORIGIN);
            expected.insert(s);
        }
        let got: BTreeSet<Vec<usize>> = model.simplices.iter().flatten().cloned().collect();
        assert_eq!(got, expected, "{name}");
    }
}

#[test]
fn maximal_flag_counts_match_chain_oracle() {
    for (name, fan) in bundled::all() {
        let oracle = chains(&fan).into_iter().filter(|c| c.len() == fan.dim()).count();
        assert_eq!(enumerate_flags(&fan, true).len(), oracle, "{name}");
    }
}

#[test]
fn every_maximal_flag_has_independent_barycenters() {
    for (name, fan) in bundled::all() {
        for f in enumerate_flags(&fan, true) {
            assert_eq!(rank(&f.barycenters(&fan)), fan.dim(), "{name}");
        }
    }
}

#[test]
fn quotient_of_diagonal_ray() {
    let q = quotient_projection(&[vec![1, 1]], 2);
    let img = q.project(&[3, 5]);
    assert_eq!(img.len(), 1);
    assert_eq!(img[0].abs(), 2);
    assert_eq!(q.project(&[1, 1]), vec![0]);
}

#[test]
fn chart_points_on_shared_faces_are_members_of_both_charts() {
    let fan = bundled::fan("p2");
    let atlas = Atlas::new(&fan).unwrap();
    let a = Flag::from_rays(&fan, &[&[0], &[0, 1]]).unwrap();
    let b = Flag::from_rays(&fan, &[&[0], &[0, 2]]).unwrap();
    let (ia, ib) = (atlas.chart_of(&a).unwrap(), atlas.chart_of(&b).unwrap());
    let p = param_boundary_point(&atlas, ia, &BaryPoint::new(vec![0.25, 0.75, 0.0]).unwrap()).unwrap();
    let w = atlas.chart_member(&p, ib, 1e-9).unwrap();
    assert!((w.coords()[0] - 0.25).abs() < 1e-12 && (w.coords()[1] - 1.0).abs() < 1e-12);
    let off = param_boundary_point(&atlas, ia, &BaryPoint::new(vec![0.25, 0.25, 0.5]).unwrap()).unwrap();
    assert!(atlas.chart_member(&off, ib, 1e-9).is_err());
}

#[test]
fn p1xp1_point_five_minus_three() {
    let fan = bundled::fan("p1xp1");
    let sub = Subdivision::new(&fan).unwrap();
    let hits: Vec<_> = sub
        .cones
        .iter()
        .filter(|c| c.contains(&to_rat_vec(&[5, -3])))
        .map(|c| c.flag.ray_sets(&fan))
        .collect();
    assert_eq!(hits, vec![vec![vec![0], vec![0, 3]]]);
}
