use std::collections::BTreeMap;

use proptest::prelude::*;

use legsphere::isotopy::{boundary_d, disk_d_flat, HProfile, IsotopyParams};
use legsphere::jetspace::{jet_lift, standard_fields, JetPoint, SpherePoint};
use legsphere::openbook::{dehn_twist_map, MonodromyWord, OpenBookDesc, Twist, TwistProfile};
use legsphere::page::{glue_f, page_chart, page_chart_inv};
use legsphere::surgery::{membership, psi_w, psi_w_inv, ProfilePair, Surface};
use legsphere::vecops::{dist_inf, dot, norm, norm_sq, normalized, reject, scale};

const LETTERS: [&str; 5] = ["A", "B", "C", "D", "E"];

/// Spheres that intersect: A-B, B-C, D-E. Everything else commutes.
fn commute(a: &str, b: &str) -> bool {
    let meets = |x: &str, y: &str| matches!((x, y), ("A", "B") | ("B", "C") | ("D", "E"));
    a != b && !meets(a, b) && !meets(b, a)
}

fn word_strategy(max: usize) -> impl Strategy<Value = MonodromyWord> {
    prop::collection::vec((0..LETTERS.len(), prop::bool::ANY), 0..max).prop_map(|v| MonodromyWord {
        word: v
            .into_iter()
            .map(|(i, pos)| Twist { sphere: LETTERS[i].to_string(), sign: if pos { 1 } else { -1 } })
            .collect(),
    })
}

fn unit_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, dim)
        .prop_filter("nonzero", |v| norm(v) > 1e-3)
        .prop_map(|v| normalized(&v))
}

/// A point of T*S^n with `|p| <= p_max`.
fn cotangent(n: usize, p_max: f64) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (unit_vec(n + 1), prop::collection::vec(-1.0..1.0f64, n + 1), 0.0..=1.0f64).prop_map(move |(q, p, r)| {
        let p = reject(&p, &q);
        let np = norm(&p);
        let p = if np > 1e-9 { scale(&p, p_max * r / np) } else { vec![0.0; q.len()] };
        (q.clone(), reject(&p, &q))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normal_form_is_idempotent(w in word_strategy(12)) {
        let once = w.normalized(commute);
        prop_assert_eq!(once.normalized(commute), once.clone());
        prop_assert!(once.len() <= w.len());
        prop_assert_eq!((w.len() - once.len()) % 2, 0);
    }

    #[test]
    fn normal_form_ignores_commuting_swaps(w in word_strategy(12), at in 0usize..12) {
        let mut swapped = w.clone();
        if at + 1 < w.len() && commute(&w.word[at].sphere, &w.word[at + 1].sphere) {
            swapped.word.swap(at, at + 1);
        }
        prop_assert_eq!(swapped.normalized(commute), w.normalized(commute));
    }

    #[test]
    fn word_times_inverse_is_identity(w in word_strategy(12)) {
        prop_assert!(w.concat(&w.inverse()).normalized(commute).is_empty());
        prop_assert!(w.inverse().concat(&w).normalized(commute).is_empty());
    }

    #[test]
    fn normal_form_is_compatible_with_products(a in word_strategy(8), b in word_strategy(8)) {
        let direct = a.concat(&b).normalized(commute);
        let staged = a.normalized(commute).concat(&b.normalized(commute)).normalized(commute);
        prop_assert_eq!(direct, staged);
    }

    #[test]
    fn all_commuting_reduces_to_exponent_sums(w in word_strategy(16)) {
        let mut sums: BTreeMap<String, i64> = BTreeMap::new();
        for t in &w.word {
            *sums.entry(t.sphere.clone()).or_default() += t.sign as i64;
        }
        let expected: Vec<Twist> = sums
            .iter()
            .flat_map(|(s, &k)| {
                let sign = if k > 0 { 1 } else { -1 };
                std::iter::repeat(Twist { sphere: s.clone(), sign }).take(k.unsigned_abs() as usize)
            })
            .collect();
        let got = w.normalized(|a: &str, b: &str| a != b);
        prop_assert_eq!(got.word, expected);
    }

    #[test]
    fn nothing_commuting_is_free_reduction(w in word_strategy(16)) {
        let mut stack: Vec<Twist> = Vec::new();
        for t in &w.word {
            if stack.last().is_some_and(|top| top.sphere == t.sphere && top.sign == -t.sign) {
                stack.pop();
            } else {
                stack.push(t.clone());
            }
        }
        prop_assert_eq!(w.normalized(|_: &str, _: &str| false).word, stack);
    }

    #[test]
    fn descriptor_text_round_trips(n in 1usize..=4, ops in prop::collection::vec(0usize..4, 0..6)) {
        let mut d: OpenBookDesc = format!("n={n} page=D^{{2n}} handles=[] spheres=[] disks=[L:bp,M:bp,K:b] meets=[L~M] word=[]")
            .parse()
            .unwrap();
        for op in ops {
            d = match op {
                0 => d.stabilize("L").unwrap_or(d),
                1 => d.stabilize("M").unwrap_or(d),
                2 => d.surgery_rewrite("S(L)").unwrap_or(d),
                _ => d.twist("S(M)", -1).unwrap_or(d),
            };
        }
        let parsed: OpenBookDesc = d.to_string().parse().unwrap();
        prop_assert_eq!(&parsed, &d);
        let c = d.canonical();
        prop_assert_eq!(c.canonical(), c.clone());
        prop_assert!(d.equivalent(&c));
        let reparsed: OpenBookDesc = d.canonical_text().parse().unwrap();
        prop_assert!(reparsed.equivalent(&d));
    }

    #[test]
    fn jet_lifts_stay_on_the_constraint_set(n in 1usize..=3, k in 0usize..10, q in unit_vec(4)) {
        let q = normalized(&q[..n + 1]);
        let fields = standard_fields(n);
        let pt = jet_lift(&fields[k], &SpherePoint::new(q.clone()).unwrap()).unwrap();
        prop_assert!(dot(pt.p(), pt.q()).abs() < 1e-12);
        prop_assert!((pt.z - fields[k].value(&q)).abs() < 1e-15);
    }

    #[test]
    fn psi_w_lands_in_s_minus_and_inverts((q, p) in cotangent(2, 1.5), z in -3.0..3.0f64) {
        let j = JetPoint::projected(z, &q, &p).unwrap();
        let s = psi_w(&j);
        let pr = ProfilePair::new(0.1).unwrap();
        prop_assert!(membership(&s, Surface::SMinus, &pr).abs() < 1e-9);
        prop_assert!(dist_inf(&psi_w_inv(&s).unwrap().to_vec(), &j.to_vec()) < 1e-12);
    }

    #[test]
    fn disk_boundary_lies_on_the_locus(t in -1.0..=1.0f64, x in unit_vec(3), eps in 0.01..0.49f64) {
        let b = boundary_d(t, &x, eps).unwrap();
        prop_assert!((norm_sq(b.p()) - (1.0 - t * t)).abs() < 1e-12);
        prop_assert!((b.z * b.z / 4.0 + norm_sq(b.p()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disk_slices_stay_on_the_constraint_set(t in -1.0..=1.0f64, x in prop::collection::vec(-0.7..0.7f64, 2)) {
        let params = IsotopyParams::new(2, 0.1).unwrap();
        let v = disk_d_flat(t, &x, &params);
        let (q, p) = (&v[1..4], &v[4..]);
        prop_assert!((norm_sq(q) - 1.0).abs() < 1e-12);
        prop_assert!(dot(q, p).abs() < 1e-12);
    }

    #[test]
    fn h_profiles_beat_the_energy_bound(t in -1.0..=1.0f64, u in 0.0..=1.0f64, eps in 0.02..0.45f64) {
        let h = HProfile::build(t, eps).unwrap();
        prop_assert!(h.energy(u * h.theta0) >= 1.0 + eps - 1e-9);
    }

    #[test]
    fn dehn_twist_properties(n in 1usize..=3, (q, p) in cotangent(3, 1.8)) {
        let q = normalized(&q[..n + 1]);
        let p = reject(&p[..n + 1], &q);
        let g = TwistProfile::default();
        let (q1, p1) = dehn_twist_map(&q, &p, &g);
        prop_assert!((norm(&q1) - 1.0).abs() < 1e-12);
        prop_assert!(dot(&q1, &p1).abs() < 1e-12);
        prop_assert!((norm(&p1) - norm(&p)).abs() < 1e-12);
        if norm(&p) >= g.outer {
            prop_assert!(dist_inf(&q1, &q).max(dist_inf(&p1, &p)) < 1e-12);
        }
        let zero = vec![0.0; n + 1];
        let (qa, pa) = dehn_twist_map(&q, &zero, &g);
        let (qb, pb) = dehn_twist_map(&qa, &pa, &g);
        prop_assert!(dist_inf(&qa, &scale(&q, -1.0)) < 1e-15);
        prop_assert!(dist_inf(&qb, &q).max(norm(&pb)) < 1e-15);
    }

    #[test]
    fn gluing_map_squares_to_the_antipode(x in prop::collection::vec(-3.0..3.0f64, 2), y in prop::collection::vec(-3.0..3.0f64, 2), t in 0.0..1.0f64, s in -1.0..1.0f64) {
        let (x1, y1, t1, s1) = glue_f(&x, &y, t, s);
        let (x2, y2, t2, s2) = glue_f(&x1, &y1, t1, s1);
        let dt = (t2 - t).rem_euclid(1.0);
        prop_assert!(dist_inf(&x2, &scale(&x, -1.0)) < 1e-12 && dist_inf(&y2, &scale(&y, -1.0)) < 1e-12);
        prop_assert!(dt.min(1.0 - dt) < 1e-12 && (s2 - s).abs() < 1e-12);
    }

    #[test]
    fn page_chart_inverts((q, p) in cotangent(2, 1.0)) {
        prop_assume!(q[2] > 0.1);
        let j = JetPoint::projected(0.0, &q, &p).unwrap();
        let (z, pp) = page_chart(&j).unwrap();
        let back = page_chart_inv(z, &pp).unwrap();
        prop_assert!(dist_inf(&back.to_vec(), &j.to_vec()) < 1e-10);
    }
}

#[test]
fn separated_inverse_pair_cancels() {
    // C commutes with B and D while B and D intersect.
    let commute = |a: &str, b: &str| a != b && !matches!((a, b), ("B", "D") | ("D", "B"));
    let t = |s: &str, sign: i8| Twist { sphere: s.into(), sign };
    let w = MonodromyWord { word: vec![t("C", 1), t("D", 1), t("B", 1), t("C", -1)] };
    assert_eq!(w.normalized(commute).word, vec![t("D", 1), t("B", 1)]);
}
