use sogkit::io::*;
use sogkit::kernels::{imq_kernel, matern_kernel};
use sogkit::numerics::HiPrec;
use sogkit::reduction::{reduce, Target};
use sogkit::vp::{build_sog, VpConfig};
use sogkit::SogError;

#[test]
fn ladder_roundtrip_is_exact() {
    let k = matern_kernel("1.5".parse().unwrap()).unwrap();
    let ap = build_sog(&k, &VpConfig::new(10, "2.5".parse().unwrap()).unwrap()).unwrap();
    let text = to_json(&ApproximantFile::Ladder(ap.clone()));
    let back = match from_json(&text).unwrap() {
        ApproximantFile::Ladder(a) => a,
        _ => panic!("expected a ladder"),
    };
    assert_eq!(back.weights, ap.weights);
    assert_eq!(back.exponents, ap.exponents);
    assert_eq!(back.kernel, ap.kernel);
    assert_eq!(back.precision_bits(), ap.precision_bits());
    for i in 0..=10 {
        let x = HiPrec::from_f64(i as f64 / 7.0, ap.precision_bits());
        assert_eq!(back.evaluate(&x), ap.evaluate(&x));
    }
    assert_eq!(to_json(&ApproximantFile::Ladder(back)), text);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["header"]["reduced"], false);
    assert_eq!(v["header"]["n_c"], "2.5");
    assert_eq!(v["terms"].as_array().unwrap().len(), 20);
    assert!(v["footer"]["hankel_bound"].is_null());
}

#[test]
fn reduced_roundtrip_is_exact() {
    let ap = build_sog(&imq_kernel(), &VpConfig::new(8, "2".parse().unwrap()).unwrap()).unwrap();
    let r = reduce(&ap, &Target::Order(6)).unwrap();
    let text = to_json(&ApproximantFile::Reduced(r.clone()));
    let back = match from_json(&text).unwrap() {
        ApproximantFile::Reduced(r) => r,
        _ => panic!("expected a reduced file"),
    };
    assert_eq!(back.terms, r.terms);
    assert_eq!(back.constant_term, r.constant_term);
    assert_eq!(back.hankel_bound, r.hankel_bound);
    let x = HiPrec::from_f64(0.3, r.precision_bits);
    assert_eq!(back.evaluate(&x), r.evaluate(&x));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["header"]["reduced"], true);
    assert!(v["terms"][0]["w_im"].is_string());
}

#[test]
fn csv_export_roundtrip() {
    let ap = build_sog(&imq_kernel(), &VpConfig::new(8, "2".parse().unwrap()).unwrap()).unwrap();
    let r = reduce(&ap, &Target::Order(4)).unwrap();
    let (csv, lossy) = to_csv(&ApproximantFile::Reduced(r.clone()));
    assert!(lossy);
    assert!(csv.starts_with("w_re,w_im,t_re,t_im\n"));
    let rows = parse_csv(&csv).unwrap();
    assert_eq!(rows.len(), r.q() + 1);
    assert_eq!(rows[0][0], r.constant_term.to_f64());
    for (row, t) in rows[1..].iter().zip(&r.terms) {
        assert_eq!(row[0], t.w.re.to_f64());
        assert_eq!(row[1], t.w.im.to_f64());
        assert_eq!(row[2], t.t.re.to_f64());
        assert_eq!(row[3], t.t.im.to_f64());
    }
    let (ladder, _) = to_csv(&ApproximantFile::Ladder(ap.clone()));
    let rows = parse_csv(&ladder).unwrap();
    assert_eq!(rows.len(), 16);
    assert_eq!(rows[3][1], 1.5);
}

#[test]
fn malformed_files_are_rejected() {
    assert!(matches!(from_json("{"), Err(SogError::Format(_))));
    let bad = r#"{"header":{"kernel":"imq","params":[],"n":1,"n_c":"1","precision_bits":256,"reduced":false},
        "terms":[{"w":"1","t":"0"}],"footer":{"s_min":"1","w_max":"1"}}"#;
    assert!(matches!(from_json(bad), Err(SogError::LengthMismatch { .. })));
}
