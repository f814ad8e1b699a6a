use super::*;
use crate::cantor::{partition_at_depth, ProbeGrid};
use crate::clopen::{ClopenSet, ClosedSet};
use crate::dyadic::Dyadic;
use proptest::prelude::*;

fn pt(s: &str) -> CantorPoint {
    s.parse().unwrap()
}

fn bits(s: &str) -> GroupElement {
    GroupElement::Bits(pt(s))
}

fn cyl(s: &str) -> Cylinder {
    Cylinder::new(s.chars().map(|c| c == '1').collect())
}

fn diag_a() -> (GroupSpec, SepFunction, GroupElement) {
    let g = GroupSpec::Dyadic;
    let a = bits("1(0)");
    let f = SepFunction::diagonal_ones(&g, vec![a.clone()]).unwrap();
    (g, f, a)
}

#[test]
fn diagonal_evaluation() {
    let (g, f, a) = diag_a();
    assert_eq!(f.eval(&pt("110(0)"), &pt("110(0)")).unwrap(), a);
    assert_eq!(f.eval(&pt("110(0)"), &pt("(0)")).unwrap(), g.identity());
    assert_eq!(f.eval(&pt("(1)"), &pt("(1)")).unwrap(), g.identity());
    assert_eq!(f.eval(&pt("(1)"), &pt("0(0)")).unwrap(), g.identity());
    assert_eq!(f.declared_image(), &[g.identity(), a][..]);
}

#[test]
fn section_preimage_is_the_cell() {
    let (_, f, a) = diag_a();
    let pre = f.section_preimage(Axis::X, &pt("110(0)"), &a).unwrap();
    assert_eq!(pre, ClopenSet::from_cylinder(&cyl("110")));
    let pre = f.section_preimage(Axis::Y, &pt("(1)"), &a).unwrap();
    assert!(pre.is_empty());
    assert!(matches!(
        f.section_preimage(Axis::X, &pt("(0)"), &bits("01(0)")),
        Err(Error::Domain(_))
    ));
}

#[test]
fn uniform_distance_to_constant() {
    let (g, f, _) = diag_a();
    let e = SepFunction::constant(&g, g.identity()).unwrap();
    for d in 1..6 {
        let dist = uniform_dist(&e, &f, Side::Left, d).unwrap();
        assert_eq!(dist.value, Dyadic::HALF);
        assert!(!dist.exact);
    }
}

#[test]
fn tables_index_x_major() {
    let g = GroupSpec::cyclic(4).unwrap();
    let vals = (0..16).map(|i| GroupElement::Index(i % 4)).collect();
    let t = SepFunction::table(&g, 2, vals).unwrap();
    // x = [10] is row 2, y = [01] is column 1
    assert_eq!(t.eval(&pt("10(1)"), &pt("01(1)")).unwrap(), GroupElement::Index(1));
    assert_eq!(t.local_depth(), Some(2));
    assert!(SepFunction::table(&g, 2, vec![g.identity(); 15]).is_err());
}

#[test]
fn mismatched_groups_are_rejected() {
    let f = SepFunction::constant(&GroupSpec::Dyadic, GroupSpec::Dyadic.identity()).unwrap();
    let h = SepFunction::constant(&GroupSpec::Real, GroupSpec::Real.identity()).unwrap();
    assert!(matches!(SepFunction::product(&f, &h), Err(Error::Domain(_))));
    assert!(SepFunction::constant(&GroupSpec::Dyadic, GroupElement::Index(0)).is_err());
}

#[test]
fn overlapping_diagonal_cells_are_rejected() {
    let g = GroupSpec::Dyadic;
    assert!(SepFunction::diagonal_cells(&g, vec![cyl("1"), cyl("10")], vec![bits("1(0)")]).is_err());
}

#[test]
fn quotient_image_is_exact() {
    // f^-1 · f has image {e} once the leaf is shared
    let (g, f, _) = diag_a();
    let q = SepFunction::product(&SepFunction::inverse(&f).unwrap(), &f).unwrap();
    assert_eq!(q.declared_image(), &[g.identity()][..]);
}

#[test]
fn post_composition_needs_full_domain() {
    let (g, f, a) = diag_a();
    let partial = Arc::new(PointMap::new("r", [(a.clone(), g.identity())]));
    assert!(SepFunction::post_compose(&f, partial).is_err());
    let full = Arc::new(PointMap::new("r", [(a.clone(), g.identity()), (g.identity(), a.clone())]));
    let h = SepFunction::post_compose(&f, full).unwrap();
    assert_eq!(h.eval(&pt("(0)"), &pt("(0)")).unwrap(), g.identity());
    assert_eq!(h.eval(&pt("(0)"), &pt("1(0)")).unwrap(), a);
}

/// Strip oracle: `x ∈ X(z, v)` iff every sampled `y ∈ v` at a depth deeper
/// than all structure gives `f(x, y) = z`.
fn strip_oracle(f: &SepFunction, axis: Axis, z: &GroupElement, v: &Cylinder, x: &CantorPoint, d: usize) -> bool {
    let ys = ClopenSet::from_cylinder(v).grid_points(d);
    let mut extra = vec![CantorPoint::ones()];
    extra.retain(|p| v.contains(p));
    ys.iter().chain(&extra).all(|y| {
        let val = match axis {
            Axis::X => f.eval(x, y).unwrap(),
            Axis::Y => f.eval(y, x).unwrap(),
        };
        &val == z
    })
}

fn check_strips(f: &SepFunction, d: usize) {
    let mut probes: Vec<CantorPoint> = ProbeGrid::new(d).representatives().to_vec();
    probes.push(CantorPoint::ones());
    probes.push(pt("1(0)"));
    for z in f.declared_image() {
        for k in 0..7 {
            let v = crate::cantor::basis_cylinder(k);
            for axis in [Axis::X, Axis::Y] {
                let strip: ClosedSet = f.strip(axis, z, &v).unwrap();
                for x in &probes {
                    assert_eq!(
                        strip.contains_point(x),
                        strip_oracle(f, axis, z, &v, x, d),
                        "{f} z={z} v={v} x={x} axis={axis:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn strips_of_diagonals_match_oracle() {
    let g = GroupSpec::Dyadic;
    check_strips(&diag_a().1, 7);
    let f = SepFunction::diagonal_ones(&g, vec![bits("1(0)"), bits("11(0)"), bits("1(0)")]).unwrap();
    check_strips(&f, 7);
    let f = SepFunction::diagonal_cells(&g, vec![cyl("00"), cyl("1")], vec![bits("1(0)"), bits("01(0)")]).unwrap();
    check_strips(&f, 6);
    let f = SepFunction::diagonal_cells(&g, vec![cyl("0"), cyl("1")], vec![bits("1(0)")]).unwrap();
    check_strips(&f, 6);
}

#[test]
fn strip_of_ones_diagonal_can_be_a_lone_point() {
    // for z = e and v = [1] every cell [1^n 0] meets v, so only 1^ω survives
    let (g, f, _) = diag_a();
    let strip = f.strip(Axis::X, &g.identity(), &cyl("0")).unwrap();
    assert!(strip.contains_point(&CantorPoint::ones()));
    assert!(!strip.is_empty());
    let strip = f.strip(Axis::X, &g.identity(), &cyl("1")).unwrap();
    assert!(!strip.is_clopen());
    assert_eq!(strip.isolated_points(), &[CantorPoint::ones()][..]);
}

#[test]
fn composite_strips_need_one_leaf() {
    let (g, f, _) = diag_a();
    let h = SepFunction::diagonal_ones(&g, vec![bits("01(0)")]).unwrap();
    let p = SepFunction::product(&f, &h).unwrap();
    assert!(matches!(
        p.strip(Axis::X, &g.identity(), &cyl("")),
        Err(Error::UnsupportedStructure(_))
    ));
    let inv = SepFunction::inverse(&f).unwrap();
    check_strips(&inv, 6);
}

#[test]
fn subbasic_membership_with_witness() {
    let (g, f, a) = diag_a();
    let nb = SubbasicNbhd::new(
        Compact::Point(pt("110(0)")),
        Compact::Set(ClopenSet::from_cylinder(&cyl("0")).into()),
        vec![g.identity()],
    )
    .unwrap();
    assert!(in_subbasic(&f, &nb).unwrap().member);
    let nb = SubbasicNbhd::new(
        Compact::Point(pt("110(0)")),
        Compact::Set(ClopenSet::from_cylinder(&cyl("1")).into()),
        vec![g.identity()],
    )
    .unwrap();
    let chk = in_subbasic(&f, &nb).unwrap();
    assert!(!chk.member);
    let (x, y) = chk.witness.unwrap();
    assert_eq!(f.eval(&x, &y).unwrap(), a);
    assert_eq!(
        image_on(&f, &nb.kx, &nb.ky).unwrap(),
        vec![g.identity(), a]
    );
    assert!(SubbasicNbhd::new(
        Compact::Set(ClosedSet::empty()),
        Compact::Set(ClosedSet::empty()),
        vec![]
    )
    .is_err());
}

#[test]
fn layerwise_distance_is_exact_for_shallow_sections() {
    let (g, f, _) = diag_a();
    let e = SepFunction::constant(&g, g.identity()).unwrap();
    let k = Compact::Set(ClopenSet::whole().into());
    let d = layerwise_dist(&f, &e, Axis::X, &pt("10(0)"), &k, 3).unwrap();
    assert_eq!(d.value, Dyadic::HALF);
    assert!(d.exact);
    let d = layerwise_dist(&f, &e, Axis::X, &pt("11110(0)"), &k, 3).unwrap();
    assert_eq!(d.value, Dyadic::ZERO);
    assert!(!d.exact);
}

#[test]
fn product_table_matches_pointwise_product() {
    let g = GroupSpec::cyclic(3).unwrap();
    let t1 = SepFunction::table(&g, 1, (0..4).map(|i| GroupElement::Index(i % 3)).collect()).unwrap();
    let t2 = SepFunction::table(&g, 2, (0..16).map(|i| GroupElement::Index(i % 2)).collect()).unwrap();
    let p = SepFunction::product_table(&g, &[t1.clone(), t2.clone()]).unwrap();
    let q = SepFunction::product(&t1, &t2).unwrap();
    assert_eq!(uniform_dist(&p, &q, Side::Left, 4).unwrap().value, Dyadic::ZERO);
    assert_eq!(p.local_depth(), Some(2));
}

fn arb_table() -> impl Strategy<Value = SepFunction> {
    proptest::collection::vec(0u32..3, 16).prop_map(|v| {
        let g = GroupSpec::cyclic(3).unwrap();
        SepFunction::table(&g, 2, v.into_iter().map(GroupElement::Index).collect()).unwrap()
    })
}

proptest! {
    #[test]
    fn sections_agree_with_evaluation(a in arb_table(), b in arb_table(), xi in 0usize..8) {
        let f = SepFunction::product(&a, &SepFunction::inverse(&b).unwrap()).unwrap();
        let x = partition_at_depth(3)[xi].representative();
        for axis in [Axis::X, Axis::Y] {
            let s = f.section(axis, &x).unwrap();
            prop_assert!(s.is_partition());
            for y in ProbeGrid::new(3).representatives() {
                let v = match axis {
                    Axis::X => f.eval(&x, y).unwrap(),
                    Axis::Y => f.eval(y, &x).unwrap(),
                };
                prop_assert_eq!(s.value_at(y), Some(&v));
                prop_assert!(f.declared_image().contains(&v));
            }
        }
    }

    #[test]
    fn table_strips_match_oracle(a in arb_table(), k in 0u64..7) {
        let v = crate::cantor::basis_cylinder(k);
        for z in a.declared_image() {
            for axis in [Axis::X, Axis::Y] {
                let strip = a.strip(axis, z, &v).unwrap();
                for x in ProbeGrid::new(3).representatives() {
                    prop_assert_eq!(strip.contains_point(x), strip_oracle(&a, axis, z, &v, x, 3));
                }
            }
        }
    }
}
