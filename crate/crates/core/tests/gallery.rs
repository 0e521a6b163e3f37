use adelic::circle::{generalized_winding, WindingOptions};
use adelic::gallery::{builtin_entries, figure1_data, RecursiveMap, GalleryEntry, GalleryObject, Param};
use adelic::numeric::Rational;
use proptest::prelude::*;

fn param() -> impl Strategy<Value = Param> {
    prop_oneof![
        (-1000i64..=1000, 1i64..=50).prop_map(|(n, d)| Param::Rational(Rational::new(n, d))),
        (-1e3..1e3f64).prop_map(Param::Real),
    ]
}

proptest! {
    #[test]
    fn entry_json_round_trip(idx in 0usize..8, params in prop::collection::vec(param(), 0..6)) {
        let entry = builtin_entries()[idx].clone().with_params(params);
        let json = serde_json::to_string(&entry).unwrap();
        let back: GalleryEntry = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, entry);
    }

    #[test]
    fn recursive_example_is_increasing(a in -243.0..243.0f64, gap in 1e-6..5.0f64) {
        let f = RecursiveMap::new(5);
        let b = (a + gap).min(243.0);
        prop_assume!(b > a);
        prop_assert!(f.eval(a).unwrap() < f.eval(b).unwrap());
    }

    #[test]
    fn base_branch_is_a_third(x in -0.999..0.999f64) {
        let f = RecursiveMap::new(3);
        prop_assert!((f.eval(x).unwrap() - x / 3.0).abs() < 1e-15);
    }
}

#[test]
fn every_builtin_entry_builds() {
    for entry in builtin_entries() {
        let built = entry.build().unwrap_or_else(|e| panic!("{}: {e}", entry.name));
        let kind = serde_json::to_value(entry.kind).unwrap();
        let expected = match built {
            GalleryObject::Circle(_) => "circle-map",
            GalleryObject::Adelic(_) => "adelic-map",
            GalleryObject::Unitization { .. } => "unitization",
        };
        assert_eq!(kind, expected, "{}", entry.name);
    }
}

#[test]
fn recursive_example_through_the_gallery() {
    let GalleryObject::Circle(f) = GalleryEntry::builtin("recursive").unwrap().build().unwrap() else {
        panic!("recursive entry is a circle map");
    };
    let w = generalized_winding(&f, &WindingOptions::default()).unwrap();
    assert_eq!(w.value, Rational::new(1, 2));
}

#[test]
fn figure_data_is_monotone_on_a_fine_grid() {
    let csv = figure1_data(0.01).unwrap();
    let values: Vec<f64> = csv.lines().skip(1).map(|l| l.split_once(',').unwrap().1.parse().unwrap()).collect();
    assert_eq!(values.len(), 1801);
    assert!(values.windows(2).all(|w| w[0] < w[1]));
    assert!(figure1_data(0.0).is_err());
}
