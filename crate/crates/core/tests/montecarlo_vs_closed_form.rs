use noma_lab::analysis::QuadratureConfig;
use noma_lab::montecarlo::{run_sweep, SweepSpec};
use noma_lab::schemes::{Link, Scheme};
use noma_lab::SystemParams;

#[test]
fn every_hdu_link_within_three_standard_errors_at_20_db() {
    let n = 1_000_000;
    let spec = SweepSpec::new(vec![20.0], n, 2024, vec![Scheme::HduCnoma]).unwrap();
    let res = run_sweep(
        &SystemParams::default(),
        &spec,
        &QuadratureConfig::default(),
        None,
    )
    .unwrap();
    let point = &res[0].points[0];
    for link in Link::ALL {
        let e = point.link(link).unwrap();
        let p = e.analytic.expect("closed form at default parameters");
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let z = (e.mc_estimate - p).abs() / se;
        assert!(
            z <= 3.0,
            "{}: mc {} vs analytic {} ({z:.2} SE)",
            link.name(),
            e.mc_estimate,
            p
        );
        assert!(e.ci_low <= e.mc_estimate && e.mc_estimate <= e.ci_high);
    }
}

#[test]
fn cnoma_links_within_three_standard_errors() {
    let n = 400_000;
    let spec = SweepSpec::new(vec![10.0, 25.0], n, 7, vec![Scheme::ConventionalCnoma]).unwrap();
    let res = run_sweep(
        &SystemParams::default(),
        &spec,
        &QuadratureConfig::default(),
        None,
    )
    .unwrap();
    for point in &res[0].points {
        for &link in Scheme::ConventionalCnoma.links() {
            let e = point.link(link).unwrap();
            let p = e.analytic.unwrap();
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (e.mc_estimate - p).abs() <= 3.0 * se,
                "{} at {} dB: {} vs {p}",
                link.name(),
                point.snr_db,
                e.mc_estimate
            );
        }
        let (mc, an) = (point.throughput_mc, point.throughput_analytic.unwrap());
        assert!((mc - an).abs() < 0.01, "throughput {mc} vs {an}");
    }
}
