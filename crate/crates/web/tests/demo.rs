use mimetic_web::demo::{basis_curves, lid_driven, project, FIELDS};

#[test]
fn basis_curves_layout_and_partition_of_unity() {
    let (n, s) = (4, 33);
    let data = basis_curves(n, s).unwrap();
    assert_eq!(data.len(), s * (1 + (n + 1) + n) + n + 1);
    for j in 0..s {
        let sum: f64 = (0..=n).map(|i| data[s * (1 + i) + j]).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
    let nodes = &data[data.len() - n - 1..];
    assert_eq!((nodes[0], nodes[n]), (-1.0, 1.0));
    assert!(basis_curves(13, 10).is_err());
}

#[test]
fn projection_error_falls_with_degree() {
    for field in FIELDS {
        for kind in ["nodal", "density"] {
            let coarse = project(field, kind, 2, 2, 30).unwrap();
            let fine = project(field, kind, 2, 8, 30).unwrap();
            assert_eq!(coarse.values.len(), 31 * 31);
            assert!(fine.max_error < coarse.max_error, "{field} {kind}");
        }
    }
    assert!(project("waves", "flux", 2, 2, 4).is_err());
    assert!(project("nope", "nodal", 2, 2, 4).is_err());
}

#[test]
fn lid_flow_is_divergence_free() {
    let flow = lid_driven(2, 6, 20).unwrap();
    assert_eq!(flow.speed.len(), 21 * 21);
    assert!(flow.max_divergence < 1e-10);
    assert!(flow.speed.iter().all(|v| v.is_finite()));
    assert!(lid_driven(17, 2, 4).is_err());
}
