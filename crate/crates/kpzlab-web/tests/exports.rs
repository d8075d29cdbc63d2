use kpzlab_web::{asep_profile, gibbs_resample_demo, s6v_top_row};

#[test]
fn six_vertex_row_is_a_height_profile() {
    let h = s6v_top_row(0.3, 0.3, 40, 30, 1).unwrap();
    assert_eq!(h.len(), 41);
    assert_eq!(h[0], 30);
    assert!(h.windows(2).all(|w| w[0] - w[1] == 0 || w[0] - w[1] == 1));
    assert_eq!(h, s6v_top_row(0.3, 0.3, 40, 30, 1).unwrap());
}

#[test]
fn asep_profile_is_nonincreasing() {
    let v: serde_json::Value = serde_json::from_str(&asep_profile(0.4, 20.0, 2).unwrap()).unwrap();
    let h: Vec<i64> = serde_json::from_value(v["h"].clone()).unwrap();
    assert!(!h.is_empty());
    assert!(h.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(*h.last().unwrap(), 0);
}

#[test]
fn resampled_curve_stays_above_its_neighbour() {
    let v: serde_json::Value = serde_json::from_str(&gibbs_resample_demo(40, 0.5, 2, 0.5, 3).unwrap()).unwrap();
    let bottom: Vec<i64> = serde_json::from_value(v["bottom"].clone()).unwrap();
    let path: Vec<i64> = serde_json::from_value(v["path"].clone()).unwrap();
    assert_eq!(bottom.len(), path.len());
    assert!(path.iter().zip(&bottom).skip(1).all(|(p, b)| p >= b));
    assert!(v["trials"].as_u64().unwrap() >= 1);
}
