use radfp_core::radiomics::{catalog, feature_index, unindex, Family, FeatureLayout, FEATURES_PER_PATCH};
use radfp_core::volume::{PatchGrid, View};

pub fn vector_lengths() {
    assert_eq!(FEATURES_PER_PATCH, 110);
    for (n, len) in [(1, 330), (2, 2640), (3, 8910)] {
        assert_eq!(FeatureLayout::for_grid(&PatchGrid::cube(n).unwrap()).len(), len);
    }
}

pub fn family_counts() {
    let counts: Vec<usize> = Family::ALL.iter().map(|f| f.len()).collect();
    assert_eq!(counts, [19, 16, 24, 16, 16, 5, 14]);
    assert_eq!(catalog::entries().count(), 110);
}

pub fn exhaustive_round_trip() {
    for patches in [1, 8, 27] {
        let total = 3 * patches * FEATURES_PER_PATCH;
        let mut seen = vec![false; total + 1];
        for j in 1..=patches {
            for v in 1..=3 {
                for k in 1..=FEATURES_PER_PATCH {
                    let i = feature_index(v, j, k, patches).unwrap();
                    assert!((1..=total).contains(&i));
                    assert!(!seen[i], "index {i} hit twice");
                    seen[i] = true;
                    let (v2, j2, k2, family, name) = unindex(i, patches).unwrap();
                    assert_eq!((v2, j2, k2), (v, j, k));
                    assert_eq!(catalog::entry(k - 1), Some((family, name)));
                }
            }
        }
        assert!(seen[1..].iter().all(|&s| s));
        assert_eq!(feature_index(1, 1, 1, patches).unwrap(), 1);
        assert_eq!(feature_index(3, patches, FEATURES_PER_PATCH, patches).unwrap(), total);
        assert!(unindex(0, patches).is_err());
        assert!(unindex(total + 1, patches).is_err());
        assert!(feature_index(4, 1, 1, patches).is_err());
        assert!(feature_index(1, patches + 1, 1, patches).is_err());
        assert!(feature_index(1, 1, FEATURES_PER_PATCH + 1, patches).is_err());

        let layout = FeatureLayout::new(patches);
        for p in 0..total {
            let loc = layout.location(p).unwrap();
            assert_eq!(layout.position(loc.view, loc.patch, loc.feature), p);
            assert_eq!(p + 1, feature_index(loc.view.position() + 1, loc.patch + 1, loc.feature + 1, patches).unwrap());
        }
        assert!(layout.location(total).is_none());
    }
    assert_eq!(View::ALL.len(), 3);
}
