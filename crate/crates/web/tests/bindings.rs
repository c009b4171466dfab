use vpb_web::{ltm, matching, pi_heatmap, vpb_heatmap};

#[test]
fn block_mass_of_one_point() {
    let h = vpb_heatmap("[[1.0, 0.5]]", 0.5, 6, 6, 2.0, 1.0).unwrap();
    assert_eq!(h.values.len(), 36);
    let total: f64 = h.values.iter().sum();
    assert!((total - 0.375).abs() < 1e-12, "{total}");
    let [x0, x1, y0, y1] = h.squares[0];
    for (got, want) in [(x0, 0.75), (x1, 1.25), (y0, 0.25), (y1, 0.75)] {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn inferred_domain_and_image() {
    let pts = "[[0.2, 0.3], [0.9, 0.6]]";
    let h = vpb_heatmap(pts, 0.3, 4, 4, 0.0, 0.0).unwrap();
    assert!(h.values.iter().all(|v| v.is_finite() && *v >= 0.0));
    let pi = pi_heatmap(pts, 0.0, 8, 8, 0.0, 0.0).unwrap();
    assert!(pi.sigma.unwrap() > 0.0);
    assert!(pi.values.iter().sum::<f64>() > 0.0);
    assert!(pi.squares.is_empty());
}

#[test]
fn worked_matching() {
    let m = matching("[[1,1],[20,5]]", "[[2,2],[20,1]]", 2.0).unwrap();
    assert!((m.cost - 17f64.sqrt()).abs() < 1e-12);
    let half = matching("[[1,1],[20,5]]", "[[2,2],[20,1]]", 0.5).unwrap();
    assert!((half.cost - 3.0).abs() < 1e-12);
    let empty = matching("[]", "[[1, 2]]", 1.0).unwrap();
    assert_eq!(empty.pairs.len(), 1);
    assert_eq!(empty.pairs[0].from, [1.0, 0.0]);
    assert_eq!(empty.pairs[0].to_point, Some(0));
    assert!((empty.cost - 2.0).abs() < 1e-12);
}

#[test]
fn orbit_and_h1() {
    let o = ltm(4.3, 300, 0.3, 0.6, 0.3).unwrap();
    assert_eq!(o.points.len(), 301, "start plus 300 iterates");
    assert!(o.points.iter().flatten().all(|c| (0.0..1.0).contains(c)));
    assert!(o.diagram.iter().all(|[b, p]| *b >= 0.0 && *p >= 0.0 && b + p <= 0.3 + 1e-12));
    assert!(ltm(4.3, 1001, 0.3, 0.6, 0.3).is_err());
}

#[test]
fn bad_input_is_an_error() {
    assert!(vpb_heatmap("not json", 0.5, 2, 2, 1.0, 1.0).is_err());
    assert!(vpb_heatmap("[[-1, 0.5]]", 0.5, 2, 2, 1.0, 1.0).is_err());
    assert!(matching("[[1,1]]", "[[1,1]]", 0.0).is_err());
}
