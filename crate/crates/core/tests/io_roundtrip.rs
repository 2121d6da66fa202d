use sfbm::polybasis::{BasisSpec, CoeffSeries, CoeffSource};
use sfbm::singular_coeffs::closed_form_series;
use sfbm::sphere_geom::{make_grid, GridKind};

#[test]
fn coefficient_csv_round_trip_is_lossless() {
    let spec = BasisSpec::new(4).unwrap();
    let s = closed_form_series(&spec, 0.37, 300).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let back = CoeffSeries::read_csv(buf.as_slice(), spec, CoeffSource::ClosedForm).unwrap();
    assert_eq!(back.values, s.values);
}

#[test]
fn coefficient_csv_rejects_garbage() {
    let spec = BasisSpec::new(3).unwrap();
    for text in ["n,a_n\n0,abc\n", "n,a_n\n0,1.0\n2,0.5\n", "n,a_n\n0,NaN\n"] {
        assert!(
            CoeffSeries::read_csv(text.as_bytes(), spec, CoeffSource::Quadrature).is_err(),
            "{text:?}"
        );
    }
}

#[test]
fn basis_spec_json_validates_lambda() {
    let spec = BasisSpec::new(5).unwrap();
    let text = serde_json::to_string(&spec).unwrap();
    assert_eq!(serde_json::from_str::<BasisSpec>(&text).unwrap(), spec);
    assert!(serde_json::from_str::<BasisSpec>(r#"{"d": 5, "lambda": 0.5}"#).is_err());
}

#[test]
fn grid_csv_has_one_row_per_point() {
    let g = make_grid(3, GridKind::FibonacciD3, 25, 0).unwrap();
    let mut buf = Vec::new();
    g.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x0,x1,x2,weight");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 25);
    for (r, p) in rows.iter().zip(&g.points) {
        assert_eq!(&r[..3], p.coords());
    }
}
